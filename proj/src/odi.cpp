#include "critwave/odi.hpp"

#include "critwave/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace critwave {

namespace {

using State = std::array<double, 2>;

// Dormand–Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double forcing_value(Forcing f, double t) {
    switch (f) {
    case Forcing::none: return 0.0;
    case Forcing::inverse_square: return 1.0 / ((1.0 + t) * (1.0 + t));
    }
    return 0.0;
}

struct Rhs {
    const OdiProblem& prob;
    State operator()(double t, const State& y) const {
        const double weight = prob.q == 0.0 ? 1.0 : std::pow(t + prob.R, -prob.q);
        return {y[1], prob.B * weight * std::pow(std::abs(y[0]), prob.p) + forcing_value(prob.forcing, t)};
    }
};

double hermite(double t0, double y0, double d0, double t1, double y1, double d1, double t) {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
           (s3 - s2) * h * d1;
}

struct Crossing {
    double t = 0.0;
    double G = 0.0;
    double Gp = 0.0;
};

// G is increasing across a step that crosses a blow-up threshold, so bisection
// on the Hermite interpolant is well posed.
Crossing locate(const OdiTrace& tr, std::size_t k, double level) {
    const double ta = tr.times[k - 1], tb = tr.times[k];
    double lo = ta, hi = tb;
    for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double g = hermite(ta, tr.G[k - 1], tr.Gp[k - 1], tb, tr.G[k], tr.Gp[k], mid);
        (g < level ? lo : hi) = mid;
    }
    Crossing c;
    c.t = 0.5 * (lo + hi);
    c.G = hermite(ta, tr.G[k - 1], tr.Gp[k - 1], tb, tr.G[k], tr.Gp[k], c.t);
    c.Gp = hermite(ta, tr.Gp[k - 1], tr.Gpp[k - 1], tb, tr.Gp[k], tr.Gpp[k], c.t);
    return c;
}

struct RawRun {
    OdiTrace trace;
    double t_blow_doubled = 0.0;
};

RawRun integrate_once(const OdiProblem& prob, double t_max, const StepControls& ctrl,
                      double tol_scale) {
    const Rhs f{prob};
    const double rtol = ctrl.rtol * tol_scale;
    const double atol = ctrl.atol * tol_scale * prob.G0;
    const double threshold = ctrl.blow_threshold * prob.G0;
    const double tail = 2.0 / (prob.p - 1.0);

    RawRun out;
    OdiTrace& tr = out.trace;
    double t = 0.0;
    State y{prob.G0, prob.G0p};
    State k1 = f(t, y);
    tr.times.push_back(t);
    tr.G.push_back(y[0]);
    tr.Gp.push_back(y[1]);
    tr.Gpp.push_back(k1[1]);

    double h = std::min(t_max, 1e-3 * std::max(prob.G0 / prob.G0p, 1e-6));
    bool first_crossed = false;
    std::int64_t steps = 0, rejected = 0;

    auto estimate = [&](const Crossing& c) {
        return ctrl.tail_correction && c.Gp > 0.0 ? c.t + tail * c.G / c.Gp : c.t;
    };

    while (t < t_max) {
        if (steps + rejected > ctrl.max_steps) {
            std::ostringstream os;
            os << "ODI integration exceeded " << ctrl.max_steps << " steps at t = " << t;
            throw InstabilityError(os.str());
        }
        const bool last = t + h >= t_max;
        if (last) h = t_max - t;

        const State y2{y[0] + h * a21 * k1[0], y[1] + h * a21 * k1[1]};
        const State k2 = f(t + c2 * h, y2);
        const State y3{y[0] + h * (a31 * k1[0] + a32 * k2[0]), y[1] + h * (a31 * k1[1] + a32 * k2[1])};
        const State k3 = f(t + c3 * h, y3);
        const State y4{y[0] + h * (a41 * k1[0] + a42 * k2[0] + a43 * k3[0]),
                       y[1] + h * (a41 * k1[1] + a42 * k2[1] + a43 * k3[1])};
        const State k4 = f(t + c4 * h, y4);
        const State y5{y[0] + h * (a51 * k1[0] + a52 * k2[0] + a53 * k3[0] + a54 * k4[0]),
                       y[1] + h * (a51 * k1[1] + a52 * k2[1] + a53 * k3[1] + a54 * k4[1])};
        const State k5 = f(t + c5 * h, y5);
        const State y6{y[0] + h * (a61 * k1[0] + a62 * k2[0] + a63 * k3[0] + a64 * k4[0] + a65 * k5[0]),
                       y[1] + h * (a61 * k1[1] + a62 * k2[1] + a63 * k3[1] + a64 * k4[1] + a65 * k5[1])};
        const State k6 = f(t + h, y6);
        const State yn{y[0] + h * (b1 * k1[0] + b3 * k3[0] + b4 * k4[0] + b5 * k5[0] + b6 * k6[0]),
                       y[1] + h * (b1 * k1[1] + b3 * k3[1] + b4 * k4[1] + b5 * k5[1] + b6 * k6[1])};
        const State k7 = f(t + h, yn);

        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(yn[i]));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(0.5 * err);

        if (!std::isfinite(err) || err > 1.0) {
            ++rejected;
            const double factor = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h *= factor;
            if (h < ctrl.h_min_rel * std::max(1.0, t)) {
                // Step underflow: a blow-up if the solution is already far past its
                // initial size and still rising, an instability otherwise.
                if (y[0] >= 1e3 * prob.G0 && y[1] > 0.0) {
                    tr.blown_up = true;
                    tr.t_blow = ctrl.tail_correction ? t + tail * y[0] / y[1] : t;
                    out.t_blow_doubled = tr.t_blow;
                    break;
                }
                std::ostringstream os;
                os << "ODI step size underflow at t = " << t << " with G = " << y[0];
                throw InstabilityError(os.str());
            }
            continue;
        }

        ++steps;
        t = last ? t_max : t + h;
        y = yn;
        k1 = k7;
        if (!std::isfinite(y[0]) || !std::isfinite(y[1]))
            throw InstabilityError("non-finite ODI state before the blow-up threshold");
        tr.times.push_back(t);
        tr.G.push_back(y[0]);
        tr.Gp.push_back(y[1]);
        tr.Gpp.push_back(k7[1]);

        if (!first_crossed && y[0] >= threshold) {
            tr.t_blow = estimate(locate(tr, tr.times.size() - 1, threshold));
            first_crossed = true;
        }
        if (first_crossed && y[0] >= 2.0 * threshold) {
            out.t_blow_doubled = estimate(locate(tr, tr.times.size() - 1, 2.0 * threshold));
            tr.blown_up = true;
            break;
        }
        const double grow = err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
        h *= std::max(0.2, grow);
    }
    if (first_crossed && !tr.blown_up) {
        // t_max reached between the two thresholds.
        tr.blown_up = true;
        out.t_blow_doubled = tr.t_blow;
    }
    tr.steps = steps;
    tr.rejected = rejected;
    return out;
}

} // namespace

void OdiProblem::validate() const {
    if (!(B >= 0.0) || !std::isfinite(B)) throw ParameterError("B must be >= 0");
    if (!(q >= 0.0) || !std::isfinite(q)) throw ParameterError("q must be >= 0");
    if (!(R > 0.0)) throw ParameterError("R must be > 0");
    if (!(p > 1.0) || !std::isfinite(p)) throw ParameterError("p must be > 1");
    if (!(G0 > 0.0) || !(G0p > 0.0)) throw ParameterError("G(0) and G'(0) must be > 0");
    if (!(T0 >= R)) throw ParameterError("T0 must satisfy T0 >= R");
}

bool OdiProblem::critical_balance(double tol) const {
    return std::abs((p - 1.0) * a - (q - 2.0)) <= tol;
}

double OdiTrace::G_at(double t) const {
    if (times.empty()) throw PreconditionError("empty ODI trace");
    if (t <= times.front()) return G.front();
    if (t >= times.back()) return G.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times.begin());
    return hermite(times[k - 1], G[k - 1], Gp[k - 1], times[k], G[k], Gp[k], t);
}

OdiTrace integrate(const OdiProblem& prob, double t_max, const StepControls& ctrl) {
    prob.validate();
    if (!(t_max > 0.0)) throw ParameterError("t_max must be > 0");
    if (!(ctrl.rtol > 0.0) || !(ctrl.atol > 0.0)) throw ParameterError("tolerances must be > 0");
    if (!(ctrl.blow_threshold > 1.0)) throw ParameterError("blow_threshold must exceed 1");

    RawRun main = integrate_once(prob, t_max, ctrl, 1.0);
    OdiTrace tr = std::move(main.trace);
    if (tr.blown_up && ctrl.error_bar) {
        const RawRun half = integrate_once(prob, t_max, ctrl, 0.5);
        double err = std::abs(main.t_blow_doubled - tr.t_blow);
        if (half.trace.blown_up) err = std::max(err, std::abs(half.trace.t_blow - tr.t_blow));
        else err = std::max(err, t_max - tr.t_blow);
        tr.t_blow_error = err;
    } else if (tr.blown_up) {
        tr.t_blow_error = std::abs(main.t_blow_doubled - tr.t_blow);
    }
    return tr;
}

bool growth_check(const OdiTrace& trace, const OdiProblem& prob, double tol) {
    if (trace.times.empty()) throw PreconditionError("growth_check needs a nonempty trace");
    const double d0 = trace.Gp.front();
    const double g0 = trace.G.front();
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        if (trace.Gp[k] < d0 * (1.0 - tol)) return false;
        if (trace.G[k] < (g0 + d0 * trace.times[k]) * (1.0 - tol)) return false;
    }
    (void)prob;
    return true;
}

BlowupVerdict verify_lemma(const OdiProblem& prob, double K0, const StepControls& ctrl,
                           const LemmaOptions& opt) {
    prob.validate();
    if (!prob.critical_balance(1e-9))
        throw ParameterError("verify_lemma requires (p-1)a = q-2 within 1e-9");
    if (!(prob.a > 0.0)) throw ParameterError("verify_lemma requires a > 0");

    BlowupVerdict v;
    v.K0 = K0;
    v.T1 = std::max(prob.T0, prob.G0 / prob.G0p);
    v.bound = 2.0 * v.T1;

    const OdiTrace tr = integrate(prob, v.bound * (1.0 + opt.margin), ctrl);
    v.blown_up = tr.blown_up;
    v.t_blow = tr.t_blow;
    v.t_blow_error = tr.t_blow_error;
    v.growth_ok = growth_check(tr, prob);

    const double t_hi = std::min({tr.blown_up ? tr.t_blow : v.bound, v.bound, tr.times.back()});
    if (t_hi <= prob.T0) {
        // Blew up before T0: G >= K t^a on [T0, T) holds vacuously.
        v.K_measured = std::numeric_limits<double>::infinity();
    } else {
        double kmin = std::numeric_limits<double>::infinity();
        auto probe = [&](double t) { kmin = std::min(kmin, tr.G_at(t) / std::pow(t, prob.a)); };
        const int m = std::max(opt.grid_points, 2);
        const double span = t_hi - prob.T0;
        for (int i = 0; i <= m; ++i) probe(prob.T0 + span * i / m);
        // doubled density on the first tenth, where G / t^a is smallest in practice
        for (int i = 0; i <= m; ++i) probe(prob.T0 + 0.1 * span * i / m);
        for (std::size_t k = 0; k < tr.times.size(); ++k)
            if (tr.times[k] >= prob.T0 && tr.times[k] <= t_hi) probe(tr.times[k]);
        v.K_measured = kmin;
    }
    v.hypothesis_met = v.K_measured >= K0;
    v.bound_respected =
        !v.hypothesis_met || (tr.blown_up && tr.t_blow <= v.bound * (1.0 + opt.tolerance));
    return v;
}

BlowupVerdict verify_lemma(const OdiProblem& prob, const ConstantLedger& ledger,
                           const StepControls& ctrl, const LemmaOptions& opt) {
    return verify_lemma(prob, k0(prob.B, prob.q, prob.a, prob.p, ledger.delta), ctrl, opt);
}

namespace {

// G(T0) for data (s·G0, s·G0p); +inf once the run blows up before T0.
double value_at_onset(OdiProblem prob, double s, const StepControls& ctrl) {
    prob.G0 *= s;
    prob.G0p *= s;
    StepControls c = ctrl;
    c.error_bar = false;
    const OdiTrace tr = integrate(prob, prob.T0, c);
    return tr.blown_up ? std::numeric_limits<double>::infinity() : tr.G.back();
}

} // namespace

LemmaSuiteResult lemma_suite(int count, std::uint64_t seed, const StepControls& ctrl) {
    if (count < 1) throw ParameterError("suite size must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_n(4, 8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    LemmaSuiteResult res;
    res.requested = count;
    const int max_attempts = 20 * count;
    while (res.hypothesis_met < count && res.attempts < max_attempts) {
        ++res.attempts;
        const int n = pick_n(rng);
        const double p = p_crit(n);
        const auto [a, q] = odi_exponents(n, p);

        OdiProblem prob;
        prob.p = p;
        prob.a = a;
        prob.q = q;
        prob.B = std::pow(10.0, -1.0 + 2.0 * unit(rng));
        prob.R = 0.5 + 1.5 * unit(rng);
        prob.T0 = prob.R * (1.0 + 3.0 * unit(rng));
        prob.forcing = unit(rng) < 0.5 ? Forcing::none : Forcing::inverse_square;
        const double K0 = k0(prob.B, q, a, p, default_delta(p));
        const double slope_ratio = 0.25 + 1.75 * unit(rng);
        const double kappa = 0.5 * unit(rng);
        prob.G0 = K0 * std::pow(prob.T0, a);
        prob.G0p = prob.G0 / (slope_ratio * prob.T0);

        // Any data with G(0) >= K0 T0^a blows up long before T0, because K0 is far
        // above the true threshold. Shrink the data until G(T0) sits just above
        // (1 + kappa) K0 T0^a so the growth hypothesis is actually exercised.
        const double target = (1.0 + kappa) * prob.G0;
        double lo = -40.0, hi = std::log(1.0 + kappa);  // log of the scale factor
        if (value_at_onset(prob, std::exp(lo), ctrl) >= target) continue;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (value_at_onset(prob, std::exp(mid), ctrl) < target ? lo : hi) = mid;
        }
        const double s = std::exp(hi);
        prob.G0 *= s;
        prob.G0p *= s;

        const BlowupVerdict v = verify_lemma(prob, K0, ctrl);
        if (!v.growth_ok) ++res.growth_failures;
        if (!v.hypothesis_met) continue;
        ++res.hypothesis_met;
        if (!v.bound_respected) ++res.violations;
        res.problems.push_back(prob);
        res.verdicts.push_back(v);
    }
    return res;
}

} // namespace critwave
