#pragma once

// Equality case of the blow-up differential inequality
//     G'' = B (t + R)^{-q} |G|^p + φ(t),   G(0) = G0 > 0,  G'(0) = G0p > 0,
// integrated with an adaptive Dormand–Prince 5(4) pair, and the check that the
// observed blow-up time respects the certified bound 2·T1.

#include "critwave/exponents.hpp"

#include <cstdint>
#include <vector>

namespace critwave {

/// Nonnegative forcing added to the right-hand side to probe strict inequalities.
enum class Forcing { none, inverse_square };  ///< 0 or (1 + t)^{-2}

struct OdiProblem {
    double B = 1.0;
    double q = 0.0;
    double R = 1.0;
    double p = 2.0;
    double G0 = 1.0;
    double G0p = 1.0;
    double T0 = 1.0;
    double a = 1.0;
    Forcing forcing = Forcing::none;

    /// B >= 0 (B = 0 is the linear degenerate case), q >= 0, R > 0, p > 1,
    /// G0 > 0, G0p > 0, T0 >= R.
    void validate() const;

    /// (p-1)a = q-2 within tol.
    [[nodiscard]] bool critical_balance(double tol = 1e-9) const;
};

struct StepControls {
    double rtol = 1e-10;
    double atol = 1e-12;            ///< scaled by G0 internally
    double blow_threshold = 1e12;   ///< blow-up once G >= blow_threshold · G0
    double h_min_rel = 1e-15;       ///< step underflow relative to max(1, t)
    std::int64_t max_steps = 2'000'000;
    bool error_bar = true;          ///< re-run at halved tolerances for t_blow_error
    bool tail_correction = true;    ///< add the self-similar residual time past the threshold
};

struct OdiTrace {
    std::vector<double> times;
    std::vector<double> G;
    std::vector<double> Gp;
    std::vector<double> Gpp;
    bool blown_up = false;
    double t_blow = 0.0;
    double t_blow_error = 0.0;
    std::int64_t steps = 0;    ///< accepted steps of the primary run
    std::int64_t rejected = 0;

    /// Cubic Hermite interpolation of G inside the recorded range.
    [[nodiscard]] double G_at(double t) const;
};

/// Integrates to t_max or blow-up. Throws InstabilityError on non-finite
/// states that are not a blow-up.
OdiTrace integrate(const OdiProblem& prob, double t_max, const StepControls& ctrl = {});

/// G'(t) >= G'(0)(1 - tol) and G(t) >= (G(0) + G'(0) t)(1 - tol) at every recorded t.
bool growth_check(const OdiTrace& trace, const OdiProblem& prob, double tol = 1e-6);

struct BlowupVerdict {
    double K_measured = 0.0;  ///< min over the grid of G(t)/t^a on [T0, min(t_blow, 2T1)]
    double K0 = 0.0;
    double T1 = 0.0;
    double bound = 0.0;       ///< 2·T1
    bool blown_up = false;
    double t_blow = 0.0;
    double t_blow_error = 0.0;
    bool hypothesis_met = false;
    bool bound_respected = true;
    bool growth_ok = true;
};

struct LemmaOptions {
    double margin = 0.05;     ///< integrate to 2 T1 (1 + margin)
    double tolerance = 1e-3;  ///< t_blow <= 2 T1 (1 + tolerance)
    int grid_points = 400;
};

BlowupVerdict verify_lemma(const OdiProblem& prob, double K0, const StepControls& ctrl = {},
                           const LemmaOptions& opt = {});

/// Uses K0 built from prob.B, prob.q, prob.a, prob.p and ledger.delta.
BlowupVerdict verify_lemma(const OdiProblem& prob, const ConstantLedger& ledger,
                           const StepControls& ctrl = {}, const LemmaOptions& opt = {});

struct LemmaSuiteResult {
    int requested = 0;
    int attempts = 0;
    int hypothesis_met = 0;
    int violations = 0;
    int growth_failures = 0;
    std::vector<OdiProblem> problems;
    std::vector<BlowupVerdict> verdicts;
};

/// Randomized instances with critical-balance exponents of n in [4, 8] and
/// B log-uniform in [0.1, 10]. The data of each draw are scaled by bisection so
/// that G(T0) lands in [K0 T0^a, 1.5 K0 T0^a]; blow-up then happens after T0 and
/// the hypothesis is tested on a nonempty window. Draws until `count` instances
/// meet the hypothesis, giving up after 20·count attempts.
LemmaSuiteResult lemma_suite(int count, std::uint64_t seed, const StepControls& ctrl = {});

} // namespace critwave
