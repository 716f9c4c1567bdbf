#pragma once

// Radially symmetric method-of-lines solver for
//     u_tt = u_rr + (n-1)/r u_r + |u|^p,   0 <= r <= L,
// with compactly supported nonnegative data and classical RK4 in time.
//
// The radial Laplacian is discretized in flux form on the cell volumes
// V_i = ∫_{r_{i-1/2}}^{r_{i+1/2}} r^{n-1} dr:
//     (Δu)_i = [A_{i+1/2}(u_{i+1} - u_i) - A_{i-1/2}(u_i - u_{i-1})] / (h V_i),  A = r^{n-1}.
// This is the usual second-order centered stencil, it reduces to n·u_rr
// (with the even ghost value u_{-1} = u_1) at the origin, and it telescopes
// under Σ V_i, so the discrete F = ω Σ V_i u_i satisfies F'' = ω Σ V_i |u_i|^p
// exactly up to the time discretization.

#include "critwave/exponents.hpp"

#include <optional>
#include <string>
#include <vector>

namespace critwave {

/// f(r) = amp_f (1 - (r/R)^2)_+^m,  g(r) = amp_g (1 - (r/R)^2)_+^m.
struct InitialProfile {
    int m = 4;
    double amp_f = 0.0;
    double amp_g = 0.0;
    double R = 1.0;

    /// Amplitudes chosen so that ∫f dx = shape.weight_f and ∫g dx = shape.weight_g in R^n.
    static InitialProfile normalized(int n, double R, const ProfileShape& shape);

    [[nodiscard]] double bump(double r) const;
    [[nodiscard]] double f(double r) const { return amp_f * bump(r); }
    [[nodiscard]] double g(double r) const { return amp_g * bump(r); }

    /// ∫_{R^n} (1 - |x|^2/R^2)_+^m dx.
    [[nodiscard]] double bump_integral(int n) const;
};

struct Grid {
    double h = 0.0;
    double L = 0.0;
    double cfl = 0.5;

    [[nodiscard]] int points() const;  ///< N + 1 nodes r_i = i h, i = 0..N
    /// Throws ParameterError unless h > 0, cfl in (0, 1] and L >= t_max + R + 2h.
    void validate(double t_max, double R) const;

    /// Domain satisfying the causality invariant for (t_max, R) with a padding
    /// of max(1, 0.1 (t_max + R)) beyond the light cone.
    static Grid for_horizon(double h, double t_max, double R, double cfl = 0.5);
};

struct SimControls {
    double t_max = 10.0;
    double sample_dt = 0.05;
    double blow_factor = 1e6;   ///< blow-up once sup|u| >= blow_factor · initial sup
    bool nonlinear = true;
    double growth_limit = 0.10; ///< halve dt if sup|u| grows more than this per step
    double dt_min = 1e-12;      ///< dt underflow also declares blow-up
    bool track_energy = false;
    bool track_support = false;
    bool keep_final_state = false;
    /// When false, t_max may exceed the causal horizon L - R - 2h and waves
    /// reflect off the Dirichlet wall. Only meant for free-field energy studies;
    /// F and the support channels are meaningless after the first reflection.
    bool enforce_causality = true;
};

enum class Outcome { survived, blew_up };

struct SolutionTrace {
    int n = 0;
    double p = 0.0;
    double R = 0.0;
    double epsilon = 0.0;
    double h = 0.0;
    double L = 0.0;
    bool nonlinear = true;

    std::vector<double> times;
    std::vector<double> F;
    std::vector<double> Fp;
    std::vector<double> Lp_p;
    std::vector<double> sup_norm;
    std::vector<double> support_radius;

    /// Optional channels (empty unless requested in SimControls).
    std::vector<double> energy;
    std::vector<double> outer_fraction; ///< L² mass of (u, u_t) beyond t + R + 2h, relative

    Outcome outcome = Outcome::survived;
    double t_end = 0.0;          ///< last time reached
    double t_est = 0.0;          ///< threshold-crossing time when blew_up
    double t_est_doubled = 0.0;  ///< crossing time of the doubled threshold
    double t_err = 0.0;          ///< |t_est_doubled - t_est|
    double initial_sup = 0.0;
    long steps = 0;

    /// Final (u, u_t) on the grid when SimControls::keep_final_state is set.
    std::vector<double> final_u;
    std::vector<double> final_ut;
};

/// Full time integration. Throws ParameterError on grid or CFL violations and
/// InstabilityError when non-finite values appear before the blow-up threshold.
SolutionTrace run(const ModelParams& params, const Grid& grid, const SimControls& ctrl);

struct SupportReport {
    bool passed = true;
    double max_fraction = 0.0;
    double worst_time = 0.0;
};

/// Checks that at each sample the L² mass of (u, u_t) beyond t + R + 2h is
/// at most `tol` of the total. Needs a trace run with track_support.
SupportReport support_check(const SolutionTrace& trace, double tol = 1e-8);

struct LifespanControls {
    double h = 0.05;          ///< coarsest spacing; refinements use h/2, h/4
    double cfl = 0.5;
    int refinements = 2;      ///< number of grids in the battery (2 or 3)
    double t_max = 100.0;
    double sample_dt = 0.5;
    double blow_factor = 1e6;
    double accept_tol = 0.10;
};

struct GridRun {
    double h = 0.0;
    bool blew_up = false;
    double t_est = 0.0;
    double t_est_doubled = 0.0;
    long steps = 0;
};

struct LifespanRecord {
    int n = 0;
    double p = 0.0;
    double R = 0.0;
    double epsilon = 0.0;
    double t_est = 0.0;
    double err = 0.0;
    bool reliable = false;
    bool survived = false;
    std::vector<GridRun> grid_meta;
    double runtime_s = 0.0;
    std::string diagnostics;
};

/// Refinement battery h, h/2 (, h/4); t_est from the finest grid, err is the
/// largest deviation over the battery and the threshold doubling.
LifespanRecord lifespan(const ModelParams& params, const LifespanControls& ctrl);

} // namespace critwave
