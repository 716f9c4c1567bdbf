#include "critwave/bounds.hpp"

#include "critwave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace critwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform_step(std::span<const double> times) {
    if (times.size() < 3) throw PreconditionError("trace needs at least 3 samples");
    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) throw PreconditionError("trace times must be strictly increasing");
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (std::abs((times[k] - times[k - 1]) - dt) > 1e-6 * dt)
            throw PreconditionError("trace sampling must be uniform");
    }
    return dt;
}

/// Running ∫_0^{t_k} F'' ds by trapezoid; evaluation between samples is linear.
class CumulativeIntegral {
public:
    CumulativeIntegral(std::span<const double> times, std::span<const double> Fpp)
        : t0_(times.front()), dt_(times[1] - times[0]), cum_(times.size(), 0.0) {
        for (std::size_t k = 1; k < times.size(); ++k)
            cum_[k] = cum_[k - 1] + 0.5 * (Fpp[k] + Fpp[k - 1]) * (times[k] - times[k - 1]);
    }

    [[nodiscard]] double operator()(double x) const {
        if (x <= t0_) return 0.0;
        const double pos = (x - t0_) / dt_;
        const auto k = static_cast<std::size_t>(pos);
        if (k + 1 >= cum_.size()) return cum_.back();
        const double w = pos - static_cast<double>(k);
        return (1.0 - w) * cum_[k] + w * cum_[k + 1];
    }

private:
    double t0_;
    double dt_;
    std::vector<double> cum_;
};

double frame_rhs_with(const CumulativeIntegral& I, double dt, const ModelParams& params, double C,
                      double t) {
    const double upper = t - params.R;
    if (upper <= 0.0) return 0.0;
    const int n = params.n;
    const double p = params.p;
    const double rho_pow = (n - 1) * (1.0 - p / 2.0);
    const double kernel_pow = (n - 1) * p / 2.0;
    const int m = std::max(2, static_cast<int>(std::ceil(upper / dt - 1e-9)));
    const double d = upper / m;
    double sum = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double rho = i * d;
        const double inner = I(0.5 * (t - rho - params.R));
        if (inner <= 0.0) continue;
        const double rho_factor = rho_pow == 0.0 ? 1.0 : std::pow(rho, rho_pow);
        const double val = rho_factor * std::pow(t - rho + params.R, -kernel_pow) * std::pow(inner, p);
        sum += (i == 0 || i == m) ? 0.5 * val : val;
    }
    return C * sum * d;
}

struct FrameScan {
    double inf_ratio = kInf;
    int samples = 0;
};

FrameScan scan_frame(std::span<const double> times, std::span<const double> Fpp,
                     const ModelParams& params, double C) {
    const CumulativeIntegral I(times, Fpp);
    const double dt = times[1] - times[0];
    FrameScan s;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < 2.0 * params.R) continue;
        const double rhs = frame_rhs_with(I, dt, params, C, times[k]);
        if (!(rhs > 0.0)) continue;
        s.inf_ratio = std::min(s.inf_ratio, Fpp[k] / rhs);
        ++s.samples;
    }
    return s;
}

double first_step_weight_power(const ModelParams& params) {
    return (params.n - 1) * (1.0 - params.p / 2.0);
}

double chain_log_power(int j, double p) { return (std::pow(p, j) - 1.0) / (p - 1.0); }

} // namespace

BoundReport check_holder(const SolutionTrace& trace, const ModelParams& params,
                         const HolderOptions& opt) {
    BoundReport rep;
    rep.name = "holder";
    rep.validity_start = 0.0;
    const double n = params.n;
    const double p = params.p;
    const double log_b = (1.0 - p) * std::log(unit_ball_volume(params.n));
    double log_min = kInf;
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        const double F = std::abs(trace.F[k]);
        const double lhs = trace.Lp_p[k];
        if (F == 0.0) continue;  // 0 >= 0
        const double radius = opt.support_scale * (trace.times[k] + params.R);
        const double log_rhs = log_b - n * (p - 1.0) * std::log(radius) + p * std::log(F);
        log_min = std::min(log_min, (lhs > 0.0 ? std::log(lhs) : -kInf) - log_rhs);
        ++rep.samples;
    }
    if (rep.samples == 0) {
        rep.applicable = false;
        rep.inf_ratio = kInf;
        rep.passed = true;
        rep.note = "vacuous: F vanishes at every sample";
        return rep;
    }
    rep.inf_ratio = std::exp(log_min);
    rep.passed = rep.inf_ratio >= 1.0 - opt.slack;
    return rep;
}

Step0Result check_step0(const SolutionTrace& trace, const ModelParams& params) {
    Step0Result res;
    BoundReport& rep = res.report;
    rep.name = "step0";
    rep.validity_start = 0.0;
    if (!trace.nonlinear || params.epsilon == 0.0) {
        rep.applicable = false;
        rep.passed = true;
        rep.inf_ratio = kInf;
        rep.note = trace.nonlinear ? "inapplicable: zero data" : "inapplicable: linear run has no source";
        return res;
    }
    if (trace.times.empty() || trace.times.back() < 4.0 * params.R)
        throw PreconditionError("check_step0 needs a trace reaching t >= 4R");
    const double w_pow = first_step_weight_power(params);
    const double eps_p = std::pow(params.epsilon, params.p);
    double c = kInf;
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        const double w = eps_p * std::pow(trace.times[k] + params.R, w_pow);
        c = std::min(c, trace.Lp_p[k] / w);
        ++rep.samples;
    }
    res.C_emp = c;
    rep.inf_ratio = c;
    rep.passed = c > 0.0 && std::isfinite(c);
    rep.note = "stability across epsilon not assessed on a single trace";
    return res;
}

Step0Result check_step0_pair(const SolutionTrace& a, const ModelParams& pa, const SolutionTrace& b,
                             const ModelParams& pb, double stability) {
    const double t_common = std::min(a.times.back(), b.times.back());
    auto clip = [t_common](const SolutionTrace& tr) {
        SolutionTrace out = tr;
        std::size_t keep = 0;
        while (keep < tr.times.size() && tr.times[keep] <= t_common + 1e-12) ++keep;
        out.times.resize(keep);
        out.F.resize(keep);
        out.Fp.resize(keep);
        out.Lp_p.resize(keep);
        out.sup_norm.resize(keep);
        out.support_radius.resize(keep);
        return out;
    };
    const Step0Result ra = check_step0(clip(a), pa);
    const Step0Result rb = check_step0(clip(b), pb);
    Step0Result res = ra;
    res.report.name = "step0_pair";
    res.report.samples = ra.report.samples + rb.report.samples;
    const double ratio = ra.C_emp / rb.C_emp;
    const bool stable = std::abs(ratio - 1.0) <= stability;
    res.C_emp = std::min(ra.C_emp, rb.C_emp);
    res.report.inf_ratio = res.C_emp;
    res.report.passed = ra.report.passed && rb.report.passed && stable;
    std::ostringstream os;
    os << "C_emp(eps=" << pa.epsilon << ")=" << ra.C_emp << ", C_emp(eps=" << pb.epsilon
       << ")=" << rb.C_emp << ", ratio " << ratio;
    res.report.note = os.str();
    return res;
}

double frame_rhs(std::span<const double> times, std::span<const double> Fpp, const ModelParams& params,
                 double C, double t) {
    const double dt = uniform_step(times);
    const CumulativeIntegral I(times, Fpp);
    return frame_rhs_with(I, dt, params, C, t);
}

FrameResult check_frame(const SolutionTrace& trace, const ModelParams& params, double C,
                        double stability) {
    FrameResult res;
    BoundReport& rep = res.report;
    rep.name = "frame";
    rep.validity_start = 2.0 * params.R;
    if (!trace.nonlinear || params.epsilon == 0.0) {
        rep.applicable = false;
        rep.passed = true;
        rep.inf_ratio = kInf;
        rep.note = "inapplicable without a nonlinear source";
        return res;
    }
    const double dt = uniform_step(trace.times);
    if (dt > params.R / 8.0 * (1.0 + 1e-9)) {
        std::ostringstream os;
        os << "check_frame needs sample_dt <= R/8 = " << params.R / 8.0 << ", trace has " << dt;
        throw PreconditionError(os.str());
    }
    const FrameScan full = scan_frame(trace.times, trace.Lp_p, params, C);

    std::vector<double> t_half, f_half;
    for (std::size_t k = 0; k < trace.times.size(); k += 2) {
        t_half.push_back(trace.times[k]);
        f_half.push_back(trace.Lp_p[k]);
    }
    const FrameScan half = scan_frame(t_half, f_half, params, C);

    rep.samples = full.samples;
    if (full.samples == 0) {
        rep.applicable = false;
        rep.passed = true;
        rep.inf_ratio = kInf;
        rep.note = "vacuous: trace ends before t = 2R";
        return res;
    }
    rep.inf_ratio = full.inf_ratio;
    res.inf_ratio_halved = half.inf_ratio;
    res.C_frame = C * full.inf_ratio;
    const double drift = std::abs(half.inf_ratio / full.inf_ratio - 1.0);
    rep.passed = full.inf_ratio > 0.0 && std::isfinite(full.inf_ratio) && drift <= stability;
    std::ostringstream os;
    os << "inf ratio with halved sampling " << half.inf_ratio << " (relative change " << drift << ")";
    rep.note = os.str();
    return res;
}

std::vector<BoundReport> check_stepj(const SolutionTrace& trace, const ModelParams& params,
                                     const ConstantLedger& ledger, int j_max, double slack) {
    if (j_max < 1) throw ParameterError("j_max must be >= 1");
    std::vector<BoundReport> out;
    const double p = params.p;
    const double R = params.R;
    const double w_pow = first_step_weight_power(params);
    const double t_end = trace.times.empty() ? 0.0 : trace.times.back();
    for (int j = 1; j <= j_max; ++j) {
        BoundReport rep;
        rep.name = "stepj_" + std::to_string(j);
        const double aj = static_cast<double>(a_seq(j));
        rep.validity_start = aj * R;
        if (!trace.nonlinear || params.epsilon == 0.0) {
            rep.applicable = false;
            rep.passed = true;
            rep.inf_ratio = kInf;
            rep.note = "inapplicable without a nonlinear source";
            out.push_back(rep);
            continue;
        }
        if (t_end <= aj * R) {
            rep.applicable = false;
            rep.passed = true;
            rep.inf_ratio = kInf;
            rep.note = "skipped: trace ends before a_j R";
            out.push_back(rep);
            continue;
        }
        const double log_cj = log_c_j(j, ledger);
        const double log_pow = chain_log_power(j, p);
        double log_min = kInf;
        for (std::size_t k = 0; k < trace.times.size(); ++k) {
            const double t = trace.times[k];
            if (t < aj * R) continue;
            const double arg = (t + (aj - 2.0) * R) / (2.0 * (aj - 1.0) * R);
            const double lg = std::log(arg);
            const double shift = t - aj * R;
            if (lg <= 0.0 || (w_pow > 0.0 && shift <= 0.0)) continue;  // RHS = 0
            const double log_rhs =
                log_cj + (w_pow == 0.0 ? 0.0 : w_pow * std::log(shift)) + log_pow * std::log(lg);
            const double lhs = trace.Lp_p[k];
            log_min = std::min(log_min, (lhs > 0.0 ? std::log(lhs) : -kInf) - log_rhs);
            ++rep.samples;
        }
        rep.inf_ratio = std::exp(log_min);
        rep.passed = rep.inf_ratio >= 1.0 - slack;
        std::ostringstream os;
        os << "log C_j = " << log_cj << ", min log(LHS/RHS) = " << log_min;
        rep.note = os.str();
        out.push_back(rep);
    }
    return out;
}

BoundReport check_F_lower(const SolutionTrace& trace, const ModelParams& params,
                          const ConstantLedger& ledger, int j, double slack) {
    BoundReport rep;
    rep.name = "F_lower_" + std::to_string(j);
    const double aj = static_cast<double>(a_seq(j));
    const double onset = std::pow(2.0 * (aj + 2.0) * params.R, 2);
    rep.validity_start = onset;
    if (!trace.nonlinear || params.epsilon == 0.0) {
        rep.applicable = false;
        rep.passed = true;
        rep.inf_ratio = kInf;
        rep.note = "inapplicable: both sides vanish without data or source";
        return rep;
    }
    const double t_end = trace.times.empty() ? 0.0 : trace.times.back();
    if (t_end < onset) {
        rep.applicable = false;
        rep.passed = true;
        rep.inf_ratio = kInf;
        rep.note = "skipped: onset beyond the trace horizon";
        return rep;
    }
    const double p = params.p;
    const double growth = params.n + 1.0 - (params.n - 1.0) * p / 2.0;
    const double log_coeff = log_c_j(j, ledger) - j * std::log(16.0) - std::log(ledger.D);
    const double log_pow = chain_log_power(j, p);
    double log_min = kInf;
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        const double t = trace.times[k];
        if (t < onset || t <= 1.0) continue;
        const double log_rhs = log_coeff + log_pow * std::log(0.5 * std::log(t)) + growth * std::log(t);
        const double F = trace.F[k];
        log_min = std::min(log_min, (F > 0.0 ? std::log(F) : -kInf) - log_rhs);
        ++rep.samples;
    }
    rep.inf_ratio = std::exp(log_min);
    rep.passed = rep.inf_ratio >= 1.0 - slack;
    return rep;
}

BoundReport check_growth_F(const SolutionTrace& trace) {
    BoundReport rep;
    rep.name = "growth_F";
    rep.validity_start = 0.0;
    if (trace.times.empty()) throw PreconditionError("check_growth_F needs samples");
    const double scale = std::max(std::abs(trace.F.front()), std::abs(trace.Fp.front()));
    if (scale == 0.0 || trace.epsilon == 0.0) {
        rep.applicable = false;
        rep.passed = true;
        rep.inf_ratio = kInf;
        rep.note = "inapplicable: zero data";
        return rep;
    }
    double worst = kInf;
    bool ok = true;
    for (std::size_t k = 1; k < trace.times.size(); ++k) {
        const double m = std::min(trace.F[k], trace.Fp[k]);
        worst = std::min(worst, m / scale);
        ok = ok && trace.F[k] > 0.0 && trace.Fp[k] > 0.0;
        ++rep.samples;
    }
    rep.inf_ratio = worst;
    rep.passed = ok;
    if (!ok) rep.note = "F or F' not strictly positive";
    return rep;
}

double chain_constant(double C_step0, double C_frame) {
    if (!(C_step0 > 0.0) && !(C_frame > 0.0)) throw ParameterError("no positive constant available");
    if (!(C_frame > 0.0)) return C_step0;
    if (!(C_step0 > 0.0)) return C_frame;
    return std::min(C_step0, C_frame);
}

} // namespace critwave
