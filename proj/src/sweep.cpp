#include "critwave/sweep.hpp"

#include "critwave/errors.hpp"
#include "critwave/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace critwave {

namespace {

bool same_eps(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

bool same_instance(const LifespanRecord& r, const ModelParams& base) {
    return r.n == base.n && r.p == base.p && r.R == base.R;
}

std::vector<LifespanRecord> reliable_only(const std::vector<LifespanRecord>& records) {
    std::vector<LifespanRecord> out;
    for (const auto& r : records)
        if (r.reliable && r.t_est > 0.0 && std::isfinite(r.t_est)) out.push_back(r);
    return out;
}

// The log may end in a partial line if a previous run was killed mid-write.
// Start the next append on a fresh line so that the partial one stays isolated.
void terminate_partial_line(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in || in.tellg() <= 0) return;
    in.seekg(-1, std::ios::end);
    char last = '\n';
    in.get(last);
    if (last != '\n') {
        std::ofstream out(path, std::ios::app | std::ios::binary);
        out << '\n';
    }
}

} // namespace

std::vector<double> geometric_grid(double from, double to, int points) {
    if (!(from > 0.0) || !(to > 0.0)) throw ParameterError("geometric grid endpoints must be > 0");
    if (points < 1) throw ParameterError("geometric grid needs at least one point");
    if (points == 1) {
        if (from != to) throw ParameterError("a one-point grid needs from == to");
        return {from};
    }
    std::vector<double> out(points);
    const double lf = std::log(from), lt = std::log(to);
    for (int i = 0; i < points; ++i) out[i] = std::exp(lf + (lt - lf) * i / (points - 1));
    out.front() = from;
    out.back() = to;
    return out;
}

std::vector<LifespanRecord> read_records(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    std::vector<LifespanRecord> out;
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(record_from_json(Json::parse(line)));
        } catch (const std::exception& e) {
            if (warnings) {
                std::ostringstream os;
                os << path.string() << ":" << lineno << ": skipping malformed record (" << e.what() << ")";
                warnings->push_back(os.str());
            }
        }
    }
    return out;
}

std::string canonical_jsonl(std::vector<LifespanRecord> records) {
    std::stable_sort(records.begin(), records.end(),
                     [](const auto& a, const auto& b) { return a.epsilon < b.epsilon; });
    std::string out;
    for (const auto& r : records) {
        Json j = to_json(r);
        j.erase("runtime_s");
        out += j.dump();
        out += '\n';
    }
    return out;
}

SweepResult run_sweep(const ModelParams& base, std::vector<double> eps_list, const SweepOptions& opt) {
    if (eps_list.empty()) throw ParameterError("eps_list must not be empty");
    for (double e : eps_list)
        if (!(e > 0.0) || !std::isfinite(e)) throw ParameterError("every epsilon in a sweep must be > 0");
    base.validate();

    SweepResult res;
    std::sort(eps_list.begin(), eps_list.end());
    std::vector<double> unique;
    for (double e : eps_list) {
        if (!unique.empty() && same_eps(unique.back(), e)) {
            std::ostringstream os;
            os << "duplicate epsilon " << e << " dropped";
            res.warnings.push_back(os.str());
            continue;
        }
        unique.push_back(e);
    }

    std::vector<double> todo;
    if (!opt.log.empty() && std::filesystem::exists(opt.log)) {
        const auto previous = read_records(opt.log, &res.warnings);
        for (double e : unique) {
            const auto it = std::find_if(previous.begin(), previous.end(), [&](const LifespanRecord& r) {
                return same_instance(r, base) && same_eps(r.epsilon, e);
            });
            if (it != previous.end()) {
                res.records.push_back(*it);
                ++res.resumed;
            } else {
                todo.push_back(e);
            }
        }
        terminate_partial_line(opt.log);
    } else {
        todo = unique;
    }

    std::ofstream log;
    if (!opt.log.empty()) {
        log.open(opt.log, std::ios::app | std::ios::binary);
        if (!log) throw IoError("cannot open sweep log " + opt.log.string());
    }

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::atomic<int> finished{0};
    std::atomic<bool> stop{false};
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const int workers = std::max(1, std::min<int>(opt.workers > 0 ? opt.workers : hw, static_cast<int>(todo.size())));

    auto worker = [&] {
        while (!stop.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= todo.size()) return;
            ModelParams params = base;
            params.epsilon = todo[i];
            LifespanRecord rec;
            try {
                rec = lifespan(params, opt.lifespan);
            } catch (const std::exception& e) {
                rec.n = params.n;
                rec.p = params.p;
                rec.R = params.R;
                rec.epsilon = params.epsilon;
                rec.reliable = false;
                rec.diagnostics = std::string("run failed: ") + e.what();
            }
            std::lock_guard lock(mu);
            if (stop.load()) return;  // past the interruption point; discard
            if (log.is_open()) {
                log << to_json(rec).dump() << '\n';
                log.flush();
            }
            res.records.push_back(std::move(rec));
            ++res.computed;
            if (opt.stop_after >= 0 && ++finished >= opt.stop_after) stop = true;
        }
    };
    if (opt.stop_after == 0) {
        stop = true;
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    res.interrupted = stop.load() && res.computed < static_cast<int>(todo.size());

    std::sort(res.records.begin(), res.records.end(),
              [](const auto& a, const auto& b) { return a.epsilon < b.epsilon; });
    return res;
}

std::string to_string(ScalingModel m) {
    switch (m) {
    case ScalingModel::exp_crit: return "exp_crit";
    case ScalingModel::power: return "power";
    case ScalingModel::exp_yz: return "exp_yz";
    }
    return "?";
}

ScalingModel parse_model(const std::string& name) {
    if (name == "exp_crit") return ScalingModel::exp_crit;
    if (name == "power") return ScalingModel::power;
    if (name == "exp_yz") return ScalingModel::exp_yz;
    throw ParameterError("unknown model '" + name + "' (expected exp_crit, power or exp_yz)");
}

double regressor(ScalingModel m, double epsilon, double p) {
    switch (m) {
    case ScalingModel::exp_crit: return std::pow(epsilon, -p * (p - 1.0));
    case ScalingModel::power: return -std::log(epsilon);
    case ScalingModel::exp_yz: return std::pow(epsilon, -p * p);
    }
    return 0.0;
}

FitResult fit_points(const std::vector<double>& eps, const std::vector<double>& T, double p, ScalingModel model) {
    if (eps.size() != T.size()) throw FitError("epsilon and T lists differ in length");
    if (eps.size() < 4) throw FitError("a fit needs at least 4 reliable records");
    const std::size_t m = eps.size();
    std::vector<double> x(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(eps[i] > 0.0) || !(T[i] > 0.0)) throw FitError("fit data must have epsilon > 0 and T > 0");
        x[i] = regressor(model, eps[i], p);
        y[i] = std::log(T[i]);
    }
    const double xm = std::accumulate(x.begin(), x.end(), 0.0) / m;
    const double ym = std::accumulate(y.begin(), y.end(), 0.0) / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (x[i] - xm) * (x[i] - xm);
        sxy += (x[i] - xm) * (y[i] - ym);
        syy += (y[i] - ym) * (y[i] - ym);
    }
    const double xscale = std::max(std::abs(xm), 1.0);
    if (!(sxx > 1e-24 * xscale * xscale * m)) throw FitError("degenerate design: all regressors equal");

    FitResult f;
    f.model = model;
    f.n_points = static_cast<int>(m);
    f.slope = sxy / sxx;
    f.intercept = ym - f.slope * xm;
    f.residuals.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        f.residuals[i] = y[i] - (f.slope * x[i] + f.intercept);
        f.rss += f.residuals[i] * f.residuals[i];
    }
    f.r2 = syy > 0.0 ? std::clamp(1.0 - f.rss / syy, 0.0, 1.0) : (f.rss == 0.0 ? 1.0 : 0.0);
    return f;
}

FitResult fit(const std::vector<LifespanRecord>& records, ScalingModel model) {
    const auto good = reliable_only(records);
    if (good.size() < 4) throw FitError("a fit needs at least 4 reliable records, got " + std::to_string(good.size()));
    std::vector<double> eps, T;
    for (const auto& r : good) {
        if (r.p != good.front().p) throw FitError("records mix different exponents p");
        eps.push_back(r.epsilon);
        T.push_back(r.t_est);
    }
    return fit_points(eps, T, good.front().p, model);
}

ModelComparison compare_models(const std::vector<LifespanRecord>& records, double p) {
    ModelComparison cmp;
    const auto good = reliable_only(records);
    if (good.size() < 6) {
        cmp.verdict = "inconclusive: " + std::to_string(good.size()) + " reliable records, at least 6 needed";
        return cmp;
    }
    std::vector<double> eps, T;
    for (const auto& r : good) {
        eps.push_back(r.epsilon);
        T.push_back(r.t_est);
    }
    const auto [lo, hi] = std::minmax_element(eps.begin(), eps.end());
    if (*hi / *lo < 2.0) {
        std::ostringstream os;
        os << "inconclusive: epsilon spans a factor " << *hi / *lo << ", at least 2 needed";
        cmp.verdict = os.str();
        return cmp;
    }
    for (auto m : {ScalingModel::exp_crit, ScalingModel::power, ScalingModel::exp_yz})
        cmp.ranking.push_back(fit_points(eps, T, p, m));
    std::stable_sort(cmp.ranking.begin(), cmp.ranking.end(),
                     [](const FitResult& a, const FitResult& b) { return a.rss < b.rss; });
    cmp.conclusive = true;
    std::ostringstream os;
    os << to_string(cmp.ranking[0].model) << " ranked first";
    for (std::size_t i = 0; i < cmp.ranking.size(); ++i)
        os << (i == 0 ? " (" : ", ") << to_string(cmp.ranking[i].model) << " rss=" << cmp.ranking[i].rss
           << " r2=" << cmp.ranking[i].r2;
    os << ")";
    cmp.verdict = os.str();
    return cmp;
}

} // namespace critwave
