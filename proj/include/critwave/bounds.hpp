#pragma once

// Functional inequalities for F(t) = ∫ u(x, t) dx checked on sampled traces.
// F'' is always read from the Lp_p channel (F'' = ‖u(t)‖_p^p), never from
// divided differences of F.

#include "critwave/exponents.hpp"
#include "critwave/wavesim.hpp"

#include <span>
#include <string>
#include <vector>

namespace critwave {

struct BoundReport {
    std::string name;
    double validity_start = 0.0;
    /// Infimum over valid samples of LHS / RHS (+inf when every RHS vanished).
    double inf_ratio = 0.0;
    bool passed = false;
    int samples = 0;
    bool applicable = true;  ///< false: vacuous, skipped or outside the hypotheses
    std::string note;
};

struct HolderOptions {
    double slack = 0.05;
    double support_scale = 1.0;  ///< multiplies t + R; < 1 is a negative control
};

/// F''(t) >= vol(B^n)^{1-p} (t+R)^{-n(p-1)} |F(t)|^p.
BoundReport check_holder(const SolutionTrace& trace, const ModelParams& params,
                         const HolderOptions& opt = {});

struct Step0Result {
    BoundReport report;
    double C_emp = 0.0;  ///< inf of F'' / (ε^p (t+R)^{(n-1)(1-p/2)})
};

/// Single-trace extraction of the first-step constant; passes iff C_emp > 0.
Step0Result check_step0(const SolutionTrace& trace, const ModelParams& params);

/// Same extraction on two traces with one profile shape and different ε over
/// their common time window; passes iff both constants are positive and
/// agree within ±stability.
Step0Result check_step0_pair(const SolutionTrace& a, const ModelParams& pa, const SolutionTrace& b,
                             const ModelParams& pb, double stability = 0.20);

/// Right-hand side of the double-integral frame inequality at time t,
///   C ∫_0^{t-R} ρ^{(n-1)(1-p/2)} (t-ρ+R)^{-(n-1)p/2} (∫_0^{(t-ρ-R)/2} F''(s) ds)^p dρ,
/// from uniformly sampled F'' by composite trapezoid. Zero for t <= R.
double frame_rhs(std::span<const double> times, std::span<const double> Fpp, const ModelParams& params,
                 double C, double t);

struct FrameResult {
    BoundReport report;
    double C_frame = 0.0;            ///< C · inf_ratio: the largest C the samples support
    double inf_ratio_halved = 0.0;   ///< same infimum with every other sample dropped
};

/// Throws PreconditionError when the sampling step exceeds R/8.
FrameResult check_frame(const SolutionTrace& trace, const ModelParams& params, double C,
                        double stability = 0.20);

/// F''(t) >= C_j (t - a_j R)^{(n-1)(1-p/2)} (log((t+(a_j-2)R)/(2(a_j-1)R)))^{(p^j-1)/(p-1)}
/// for j = 1..j_max, compared in log space. Indices past the horizon are reported as skipped.
std::vector<BoundReport> check_stepj(const SolutionTrace& trace, const ModelParams& params,
                                     const ConstantLedger& ledger, int j_max = 3, double slack = 0.05);

/// F(t) >= C_j / (16^j D) (½ log t)^{(p^j-1)/(p-1)} t^{n+1-(n-1)p/2} for t >= {2(a_j+2)R}^2.
BoundReport check_F_lower(const SolutionTrace& trace, const ModelParams& params,
                          const ConstantLedger& ledger, int j, double slack = 0.05);

/// F > 0 and F' > 0 at every sample after t = 0. inf_ratio is the smallest
/// min(F, F') relative to max(F(0), F'(0)).
BoundReport check_growth_F(const SolutionTrace& trace);

/// Constant used to build the iteration chain: the smaller of the first-step
/// and frame constants.
double chain_constant(double C_step0, double C_frame);

} // namespace critwave
