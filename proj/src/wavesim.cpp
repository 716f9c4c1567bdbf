#include "critwave/wavesim.hpp"

#include "critwave/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace critwave {

namespace {

// Values below this fraction of the initial sup-norm are flushed to zero
// outside the causal window; keeps the active range tight and avoids denormals.
constexpr double kFlushFraction = 1e-30;

struct PowerTwo {
    double operator()(double u) const { return u * u; }
};
struct PowerThreeHalves {
    double operator()(double u) const {
        const double a = std::abs(u);
        return a * std::sqrt(a);
    }
};
struct PowerGeneric {
    double p;
    double operator()(double u) const { return std::pow(std::abs(u), p); }
};
struct NoSource {
    double operator()(double) const { return 0.0; }
};

/// Flux-form radial operator coefficients; see the header comment.
struct RadialOperator {
    std::vector<double> plus;   // A_{i+1/2} / (h V_i)
    std::vector<double> minus;  // A_{i-1/2} / (h V_i)
    std::vector<double> volume; // V_i
    std::vector<double> face;   // A_{i+1/2}

    RadialOperator(int n, double h, int points) {
        plus.assign(points, 0.0);
        minus.assign(points, 0.0);
        volume.assign(points, 0.0);
        face.assign(points, 0.0);
        for (int i = 0; i < points; ++i) {
            const double r_out = (i + 0.5) * h;
            const double r_in = i == 0 ? 0.0 : (i - 0.5) * h;
            const double v = (std::pow(r_out, n) - std::pow(r_in, n)) / n;
            volume[i] = v;
            face[i] = std::pow(r_out, n - 1);
            plus[i] = face[i] / (h * v);
            minus[i] = i == 0 ? 0.0 : std::pow(r_in, n - 1) / (h * v);
        }
    }
};

class Integrator {
public:
    Integrator(const ModelParams& params, const Grid& grid, const SimControls& ctrl)
        : params_(params), grid_(grid), ctrl_(ctrl), N_(grid.points() - 1),
          op_(params.n, grid.h, N_ + 1), omega_(unit_sphere_area(params.n)) {
        const auto prof = InitialProfile::normalized(params.n, params.R, params.profile);
        u_.assign(N_ + 1, 0.0);
        v_.assign(N_ + 1, 0.0);
        for (int i = 0; i < N_; ++i) {
            const double r = i * grid.h;
            u_[i] = params.epsilon * prof.f(r);
            v_[i] = params.epsilon * prof.g(r);
        }
        for (auto* buf : {&su_[0], &sv_[0], &su_[1], &sv_[1], &acc_u_, &acc_v_})
            buf->assign(N_ + 1, 0.0);
        hi_ = std::min(N_ - 1, static_cast<int>(std::ceil(params.R / grid.h)) + 2);
        double s0 = 0.0;
        for (int i = 0; i <= hi_; ++i) s0 = std::max({s0, std::abs(u_[i]), std::abs(v_[i])});
        initial_sup_ = s0;
        flush_level_ = kFlushFraction * s0;
    }

    SolutionTrace integrate() {
        if (!ctrl_.nonlinear) return integrate_with(NoSource{});
        const double p = params_.p;
        if (p == 2.0) return integrate_with(PowerTwo{});
        if (p == 1.5) return integrate_with(PowerThreeHalves{});
        return integrate_with(PowerGeneric{p});
    }

private:
    template <class Source>
    void stage(const std::vector<double>& us, const std::vector<double>& vs, std::vector<double>& nu,
               std::vector<double>& nv, double weight, double next_coeff, double dt, bool last,
               const Source& source) {
        const double* __restrict pu = us.data();
        const double* __restrict pv = vs.data();
        const double* __restrict cp = op_.plus.data();
        const double* __restrict cm = op_.minus.data();
        double* __restrict au = acc_u_.data();
        double* __restrict av = acc_v_.data();
        const double* __restrict u0 = u_.data();
        const double* __restrict v0 = v_.data();
        double* __restrict qu = nu.data();
        double* __restrict qv = nv.data();
        const int hi = hi_;
        for (int i = 0; i <= hi; ++i) {
            const double left = i == 0 ? pu[1] : pu[i - 1];
            const double lap = cp[i] * (pu[i + 1] - pu[i]) - cm[i] * (pu[i] - left);
            const double ku = pv[i];
            const double kv = lap + source(pu[i]);
            au[i] += weight * ku;
            av[i] += weight * kv;
            if (!last) {
                qu[i] = u0[i] + next_coeff * dt * ku;
                qv[i] = v0[i] + next_coeff * dt * kv;
            }
        }
    }

    template <class Source>
    void rk4_step(double dt, const Source& source) {
        hi_ = std::min(N_ - 1, hi_ + 4);
        std::fill(acc_u_.begin(), acc_u_.begin() + hi_ + 1, 0.0);
        std::fill(acc_v_.begin(), acc_v_.begin() + hi_ + 1, 0.0);
        stage(u_, v_, su_[0], sv_[0], 1.0, 0.5, dt, false, source);
        stage(su_[0], sv_[0], su_[1], sv_[1], 2.0, 0.5, dt, false, source);
        stage(su_[1], sv_[1], su_[0], sv_[0], 2.0, 1.0, dt, false, source);
        stage(su_[0], sv_[0], su_[1], sv_[1], 1.0, 0.0, dt, true, source);
        const double c = dt / 6.0;
        for (int i = 0; i <= hi_; ++i) {
            u_[i] += c * acc_u_[i];
            v_[i] += c * acc_v_[i];
        }
        trim_window();
    }

    void trim_window() {
        int last = hi_;
        while (last > 0 && std::abs(u_[last]) <= flush_level_ && std::abs(v_[last]) <= flush_level_)
            --last;
        for (int i = last + 1; i <= hi_; ++i) {
            u_[i] = v_[i] = 0.0;
            su_[0][i] = sv_[0][i] = su_[1][i] = sv_[1][i] = 0.0;
        }
        hi_ = last;
    }

    [[nodiscard]] double sup_u() const {
        double s = 0.0;
        for (int i = 0; i <= hi_; ++i) s = std::max(s, std::abs(u_[i]));
        return s;
    }

    template <class Source>
    void record(SolutionTrace& tr, double t, const Source& source) const {
        double F = 0.0, Fp = 0.0, lp = 0.0, sup = 0.0, supv = 0.0;
        for (int i = 0; i <= hi_; ++i) {
            const double V = op_.volume[i];
            F += V * u_[i];
            Fp += V * v_[i];
            lp += V * (ctrl_.nonlinear ? source(u_[i]) : std::pow(std::abs(u_[i]), params_.p));
            sup = std::max(sup, std::abs(u_[i]));
            supv = std::max(supv, std::abs(v_[i]));
        }
        const double cut = 1e-12 * (sup + supv);
        int edge = 0;
        for (int i = hi_; i >= 0; --i) {
            if (std::abs(u_[i]) + std::abs(v_[i]) > cut) {
                edge = i;
                break;
            }
        }
        tr.times.push_back(t);
        tr.F.push_back(omega_ * F);
        tr.Fp.push_back(omega_ * Fp);
        tr.Lp_p.push_back(omega_ * lp);
        tr.sup_norm.push_back(sup);
        tr.support_radius.push_back(cut > 0.0 ? edge * grid_.h : 0.0);
        if (ctrl_.track_energy) {
            double e = 0.0;
            for (int i = 0; i <= hi_; ++i) {
                const double du = u_[i + 1] - u_[i];
                e += op_.volume[i] * v_[i] * v_[i] + op_.face[i] * du * du / grid_.h;
            }
            tr.energy.push_back(0.5 * omega_ * e);
        }
        if (ctrl_.track_support) {
            const double r_cut = t + params_.R + 2.0 * grid_.h;
            double total = 0.0, outer = 0.0;
            for (int i = 0; i <= hi_; ++i) {
                const double m = op_.volume[i] * (u_[i] * u_[i] + v_[i] * v_[i]);
                total += m;
                if (i * grid_.h > r_cut) outer += m;
            }
            tr.outer_fraction.push_back(total > 0.0 ? outer / total : 0.0);
        }
    }

    template <class Source>
    SolutionTrace integrate_with(const Source& source) {
        SolutionTrace tr;
        tr.n = params_.n;
        tr.p = params_.p;
        tr.R = params_.R;
        tr.epsilon = params_.epsilon;
        tr.h = grid_.h;
        tr.L = grid_.L;
        tr.nonlinear = ctrl_.nonlinear;
        tr.initial_sup = initial_sup_;

        const double dt_nominal = grid_.cfl * grid_.h;
        const double threshold = ctrl_.blow_factor * initial_sup_;
        const bool can_blow = ctrl_.nonlinear && initial_sup_ > 0.0;
        double dt = dt_nominal;
        double t = 0.0;
        long sample_index = 0;
        record(tr, t, source);
        double next_sample = ctrl_.sample_dt;
        double sup_prev = sup_u();
        bool crossed = false;
        long steps = 0;

        while (t < ctrl_.t_max) {
            double step = std::min({dt, next_sample - t, ctrl_.t_max - t});
            if (step <= 0.0) step = dt;
            rk4_step(step, source);
            ++steps;
            const double t_prev = t;
            t += step;
            const double sup = sup_u();
            if (!std::isfinite(sup)) {
                std::ostringstream os;
                os << "non-finite solution at t = " << t << " before the blow-up threshold";
                throw InstabilityError(os.str());
            }

            if (can_blow) {
                if (!crossed && sup >= threshold) {
                    tr.t_est = crossing_time(t_prev, sup_prev, t, sup, threshold);
                    crossed = true;
                }
                if (crossed && sup >= 2.0 * threshold) {
                    tr.t_est_doubled = crossing_time(t_prev, sup_prev, t, sup, 2.0 * threshold);
                    tr.outcome = Outcome::blew_up;
                    tr.t_end = t;
                    break;
                }
                if (sup_prev > 0.0 && sup > (1.0 + ctrl_.growth_limit) * sup_prev) {
                    dt *= 0.5;
                } else if (sup_prev > 0.0 && sup < (1.0 + 0.25 * ctrl_.growth_limit) * sup_prev &&
                           dt < dt_nominal) {
                    dt = std::min(dt_nominal, 2.0 * dt);
                }
                if (dt < ctrl_.dt_min) {
                    if (!crossed) tr.t_est = t;
                    tr.t_est_doubled = t;
                    tr.outcome = Outcome::blew_up;
                    tr.t_end = t;
                    break;
                }
            }
            sup_prev = sup;

            if (t >= next_sample - 1e-12 * std::max(1.0, next_sample)) {
                t = next_sample;
                record(tr, t, source);
                ++sample_index;
                next_sample = (sample_index + 1) * ctrl_.sample_dt;
            }
        }
        if (tr.outcome == Outcome::survived) tr.t_end = t;
        else tr.t_err = std::abs(tr.t_est_doubled - tr.t_est);
        tr.steps = steps;
        if (ctrl_.keep_final_state) {
            tr.final_u = u_;
            tr.final_ut = v_;
        }
        return tr;
    }

    // Log-linear interpolation of the sup-norm between two step ends.
    static double crossing_time(double t0, double s0, double t1, double s1, double level) {
        if (!(s0 > 0.0) || s1 <= s0) return t1;
        const double w = (std::log(level) - std::log(s0)) / (std::log(s1) - std::log(s0));
        return t0 + std::clamp(w, 0.0, 1.0) * (t1 - t0);
    }

    ModelParams params_;
    Grid grid_;
    SimControls ctrl_;
    int N_;
    RadialOperator op_;
    double omega_;
    std::vector<double> u_, v_;
    std::vector<double> su_[2], sv_[2];
    std::vector<double> acc_u_, acc_v_;
    int hi_ = 0;
    double initial_sup_ = 0.0;
    double flush_level_ = 0.0;
};

} // namespace

double InitialProfile::bump(double r) const {
    const double s = r / R;
    if (s >= 1.0) return 0.0;
    return std::pow(1.0 - s * s, m);
}

double InitialProfile::bump_integral(int n) const {
    // ω_{n-1} R^n ∫_0^1 (1-s^2)^m s^{n-1} ds = ω_{n-1} R^n · ½ B(n/2, m+1)
    const double beta = std::tgamma(n / 2.0) * std::tgamma(m + 1.0) / std::tgamma(n / 2.0 + m + 1.0);
    return unit_sphere_area(n) * std::pow(R, n) * 0.5 * beta;
}

InitialProfile InitialProfile::normalized(int n, double R, const ProfileShape& shape) {
    InitialProfile prof;
    prof.m = shape.m;
    prof.R = R;
    const double base = prof.bump_integral(n);
    prof.amp_f = shape.weight_f / base;
    prof.amp_g = shape.weight_g / base;
    return prof;
}

int Grid::points() const { return static_cast<int>(std::llround(L / h)) + 1; }

void Grid::validate(double t_max, double R) const {
    if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("grid spacing h must be > 0");
    if (!(cfl > 0.0 && cfl <= 1.0))
        throw ParameterError("CFL number must lie in (0, 1], got " + std::to_string(cfl));
    if (!(L >= t_max + R + 2.0 * h - 1e-12 * L)) {
        std::ostringstream os;
        os << "domain radius L = " << L << " violates L >= t_max + R + 2h = " << t_max + R + 2.0 * h;
        throw ParameterError(os.str());
    }
    if (points() < 4) throw ParameterError("grid needs at least 4 points");
}

Grid Grid::for_horizon(double h, double t_max, double R, double cfl) {
    Grid g;
    g.h = h;
    g.cfl = cfl;
    // The semi-discrete scheme sends a small dispersive precursor ahead of the
    // light cone. Padding keeps it off the Dirichlet wall; nodes outside the
    // active window cost nothing, so the padding is free.
    const double pad = std::max(1.0, 0.1 * (t_max + R));
    g.L = h * std::ceil((t_max + R + pad) / h + 2.0);
    return g;
}

SolutionTrace run(const ModelParams& params, const Grid& grid, const SimControls& ctrl) {
    params.validate();
    if (ctrl.enforce_causality) grid.validate(ctrl.t_max, params.R);
    else grid.validate(0.0, params.R);
    if (!(ctrl.sample_dt > 0.0)) throw ParameterError("sample_dt must be > 0");
    if (!(ctrl.t_max > 0.0)) throw ParameterError("t_max must be > 0");
    if (!(ctrl.blow_factor > 1.0)) throw ParameterError("blow_factor must exceed 1");
    Integrator integ(params, grid, ctrl);
    return integ.integrate();
}

SupportReport support_check(const SolutionTrace& trace, double tol) {
    if (trace.outer_fraction.size() != trace.times.size())
        throw PreconditionError("support_check needs a trace recorded with track_support");
    SupportReport rep;
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        if (trace.outer_fraction[k] > rep.max_fraction) {
            rep.max_fraction = trace.outer_fraction[k];
            rep.worst_time = trace.times[k];
        }
    }
    rep.passed = rep.max_fraction <= tol;
    return rep;
}

LifespanRecord lifespan(const ModelParams& params, const LifespanControls& ctrl) {
    if (ctrl.refinements < 2) throw ParameterError("lifespan needs at least 2 refinements");
    const auto start = std::chrono::steady_clock::now();
    LifespanRecord rec;
    rec.n = params.n;
    rec.p = params.p;
    rec.R = params.R;
    rec.epsilon = params.epsilon;
    std::ostringstream diag;

    bool unstable = false;
    double h = ctrl.h;
    for (int k = 0; k < ctrl.refinements; ++k, h *= 0.5) {
        GridRun gr;
        gr.h = h;
        SimControls sc;
        sc.t_max = ctrl.t_max;
        sc.sample_dt = ctrl.sample_dt;
        sc.blow_factor = ctrl.blow_factor;
        try {
            const auto tr = run(params, Grid::for_horizon(h, ctrl.t_max, params.R, ctrl.cfl), sc);
            gr.blew_up = tr.outcome == Outcome::blew_up;
            gr.t_est = gr.blew_up ? tr.t_est : tr.t_end;
            gr.t_est_doubled = gr.blew_up ? tr.t_est_doubled : tr.t_end;
            gr.steps = tr.steps;
        } catch (const InstabilityError& e) {
            unstable = true;
            diag << "h=" << h << ": " << e.what() << "; ";
        }
        rec.grid_meta.push_back(gr);
    }

    const GridRun& finest = rec.grid_meta.back();
    rec.t_est = finest.t_est;
    rec.survived = !finest.blew_up && !unstable;
    double err = std::abs(finest.t_est_doubled - finest.t_est);
    bool all_blew = true;
    for (const auto& g : rec.grid_meta) {
        all_blew = all_blew && g.blew_up;
        err = std::max(err, std::abs(g.t_est - finest.t_est));
    }
    rec.err = err;
    if (unstable) {
        rec.reliable = false;
    } else if (!all_blew) {
        rec.reliable = false;
        diag << (rec.survived ? "survived to t_max on the finest grid; "
                              : "blow-up not reproduced on every grid; ");
    } else {
        rec.reliable = rec.t_est > 0.0 && err <= ctrl.accept_tol * rec.t_est;
        if (!rec.reliable) diag << "refinement deviation " << err / rec.t_est << " exceeds tolerance; ";
    }
    rec.diagnostics = diag.str();
    rec.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

} // namespace critwave
