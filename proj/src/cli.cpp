#include "critwave/cli.hpp"

#include "critwave/bounds.hpp"
#include "critwave/config.hpp"
#include "critwave/errors.hpp"
#include "critwave/io.hpp"
#include "critwave/odi.hpp"
#include "critwave/sweep.hpp"
#include "critwave/wavesim.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>

namespace critwave::cli {

namespace {

struct Command {
    const char* name;
    const char* description;
    std::vector<std::string> keys;
};

const std::vector<Command>& commands() {
    static const std::vector<Command> c = {
        {"constants", "print the constant ledger and the lifespan bounds",
         {"n", "p", "R", "eps", "C", "delta", "json"}},
        {"odi", "integrate the blow-up ODE and test the certified bound",
         {"n", "p", "B", "q", "R", "G0", "G0p", "T0", "delta", "tmax", "suite", "seed", "trace", "json"}},
        {"simulate", "run the radial wave solver",
         {"n", "p", "R", "eps", "m", "weight_f", "weight_g", "h", "L", "tmax", "cfl", "sample_dt",
          "blow_factor", "linear", "trace", "json"}},
        {"check", "verify the functional inequalities on a trace CSV",
         {"trace", "n", "p", "R", "eps", "linear", "j", "json"}},
        {"sweep", "lifespan estimates over a geometric epsilon grid",
         {"n", "p", "R", "m", "weight_f", "weight_g", "eps_from", "eps_to", "points", "h", "cfl", "tmax",
          "sample_dt", "blow_factor", "refinements", "accept_tol", "workers", "out", "json"}},
        {"fit", "fit a scaling law (or rank all three) to sweep records", {"in", "model", "json"}},
        {"report", "summarize sweep records and emit plot data", {"in", "plot", "json"}},
    };
    return c;
}

bool is_flag(const std::string& key) { return key == "linear" || key == "json"; }

std::string dashed(std::string key) {
    for (char& c : key)
        if (c == '_') c = '-';
    return key;
}

void emit(std::ostream& out, const Json& j, bool as_json) {
    if (as_json) {
        out << j.dump(2) << '\n';
        return;
    }
    auto line = [&](const std::string& k, const Json& v) {
        out << std::left << std::setw(16) << k << ' ' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    };
    if (j.is_array()) {
        for (const auto& item : j) {
            for (const auto& [k, v] : item.items()) line(k, v);
            out << '\n';
        }
    } else {
        for (const auto& [k, v] : j.items()) line(k, v);
    }
}

double effective_delta(const RunConfig& c, double p) { return c.delta > 0.0 ? c.delta : default_delta(p); }

int cmd_constants(const RunConfig& c, std::ostream& out) {
    const ModelParams mp = c.model_params();
    if (!(mp.epsilon > 0.0)) throw ParameterError("constants needs eps > 0");
    const ConstantLedger L = make_ledger(mp, c.C, effective_delta(c, mp.p));
    Json j = to_json(L);
    j["gamma"] = gamma(mp.p, mp.n);
    j["p_crit"] = p_crit(mp.n);
    j.update(to_json(lifespan_bound(L, mp.epsilon)));
    emit(out, j, c.json);
    return kOk;
}

int cmd_odi(const RunConfig& c, std::ostream& out) {
    StepControls ctrl;
    if (c.suite > 0) {
        const auto res = lemma_suite(c.suite, static_cast<std::uint64_t>(c.seed), ctrl);
        Json j{{"requested", res.requested},         {"attempts", res.attempts},
               {"hypothesis_met", res.hypothesis_met}, {"violations", res.violations},
               {"growth_failures", res.growth_failures}};
        emit(out, j, c.json);
        const bool ok = res.violations == 0 && res.growth_failures == 0 && res.hypothesis_met == res.requested;
        return ok ? kOk : kCheckFailed;
    }
    OdiProblem prob;
    prob.p = c.resolved_p();
    prob.B = c.B;
    prob.q = c.q;
    prob.R = c.R;
    prob.G0 = c.G0;
    prob.G0p = c.G0p;
    prob.T0 = c.T0;
    prob.a = (prob.q - 2.0) / (prob.p - 1.0);
    prob.validate();

    if (prob.a > 0.0 && prob.B > 0.0) {
        const double K0 = k0(prob.B, prob.q, prob.a, prob.p, effective_delta(c, prob.p));
        const BlowupVerdict v = verify_lemma(prob, K0, ctrl);
        if (!c.trace.empty()) write_odi_csv(c.trace, integrate(prob, v.bound * 1.05, ctrl));
        Json j = to_json(v);
        j["a"] = prob.a;
        emit(out, j, c.json);
        return v.bound_respected && v.growth_ok ? kOk : kCheckFailed;
    }
    // No critical balance: plain integration, no lemma claim.
    const OdiTrace tr = integrate(prob, c.tmax, ctrl);
    if (!c.trace.empty()) write_odi_csv(c.trace, tr);
    const bool growth = growth_check(tr, prob);
    Json j{{"blown_up", tr.blown_up},
           {"t_blow", tr.blown_up ? Json(tr.t_blow) : Json(nullptr)},
           {"t_blow_error", tr.t_blow_error},
           {"steps", tr.steps},
           {"growth_ok", growth},
           {"lemma", "not applicable: (p-1)a = q-2 has no positive solution a"}};
    emit(out, j, c.json);
    return growth ? kOk : kCheckFailed;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
    const ModelParams mp = c.model_params();
    Grid g = c.L > 0.0 ? Grid{c.h, c.L, c.cfl} : Grid::for_horizon(c.h, c.tmax, mp.R, c.cfl);
    SimControls sc;
    sc.t_max = c.tmax;
    sc.sample_dt = c.sample_dt;
    sc.blow_factor = c.blow_factor;
    sc.nonlinear = !c.linear;
    const SolutionTrace tr = run(mp, g, sc);
    if (!c.trace.empty()) write_trace_csv(std::filesystem::path(c.trace), tr);
    emit(out, trace_summary(tr), c.json);
    return kOk;
}

int cmd_check(const RunConfig& c, std::ostream& out) {
    if (c.trace.empty()) throw ParameterError("check needs --trace <file.csv>");
    const ModelParams mp = c.model_params();
    SolutionTrace tr = read_trace_csv(std::filesystem::path(c.trace));
    tr.n = mp.n;
    tr.p = mp.p;
    tr.R = mp.R;
    tr.epsilon = mp.epsilon;
    tr.nonlinear = !c.linear;

    std::vector<BoundReport> reports;
    reports.push_back(check_holder(tr, mp));
    const Step0Result s0 = check_step0(tr, mp);
    reports.push_back(s0.report);

    std::optional<FrameResult> frame;
    try {
        frame = check_frame(tr, mp, 1.0);
        reports.push_back(frame->report);
    } catch (const PreconditionError& e) {
        BoundReport r;
        r.name = "frame";
        r.applicable = false;
        r.passed = false;
        r.inf_ratio = std::numeric_limits<double>::quiet_NaN();
        r.note = e.what();
        reports.push_back(r);
    }

    if (s0.report.applicable && s0.C_emp > 0.0) {
        const double C = chain_constant(s0.C_emp, frame ? frame->C_frame : 0.0);
        const ConstantLedger L = make_ledger(mp, C, default_delta(mp.p));
        for (auto& r : check_stepj(tr, mp, L, c.j)) reports.push_back(std::move(r));
        reports.push_back(check_F_lower(tr, mp, L, 1));
    }
    reports.push_back(check_growth_F(tr));

    Json arr = Json::array();
    bool ok = true;
    for (const auto& r : reports) {
        arr.push_back(to_json(r));
        ok = ok && r.passed;
    }
    emit(out, arr, c.json);
    return ok ? kOk : kCheckFailed;
}

int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const ModelParams mp = c.model_params();
    SweepOptions opt;
    opt.lifespan.h = c.h;
    opt.lifespan.cfl = c.cfl;
    opt.lifespan.t_max = c.tmax;
    opt.lifespan.sample_dt = c.sample_dt;
    opt.lifespan.blow_factor = c.blow_factor;
    opt.lifespan.refinements = c.refinements;
    opt.lifespan.accept_tol = c.accept_tol;
    opt.workers = c.workers;
    if (!c.out.empty()) opt.log = c.out;
    const auto res = run_sweep(mp, geometric_grid(c.eps_from, c.eps_to, c.points), opt);
    for (const auto& w : res.warnings) err << "warning: " << w << '\n';
    Json arr = Json::array();
    for (const auto& r : res.records)
        arr.push_back({{"epsilon", r.epsilon}, {"t_est", r.t_est}, {"err", r.err}, {"reliable", r.reliable}});
    emit(out, arr, c.json);
    return kOk;
}

Json fit_json(const FitResult& f) {
    return Json{{"model", to_string(f.model)}, {"slope", f.slope},     {"intercept", f.intercept},
                {"r2", f.r2},                  {"rss", f.rss},         {"n_points", f.n_points},
                {"residuals", f.residuals}};
}

std::vector<LifespanRecord> load_records(const RunConfig& c, std::ostream& err) {
    if (c.in.empty()) throw ParameterError("--in <records.jsonl> is required");
    std::vector<std::string> warnings;
    auto records = read_records(c.in, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    if (records.empty()) throw ParameterError("no records in " + c.in);
    return records;
}

int cmd_fit(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto records = load_records(c, err);
    if (c.model == "all") {
        const auto cmp = compare_models(records, records.front().p);
        Json ranking = Json::array();
        for (const auto& f : cmp.ranking) ranking.push_back(fit_json(f));
        Json j{{"conclusive", cmp.conclusive}, {"verdict", cmp.verdict}, {"ranking", ranking}};
        out << j.dump(2) << '\n';
        return kOk;
    }
    const FitResult f = fit(records, parse_model(c.model));
    emit(out, fit_json(f), c.json);
    return kOk;
}

int cmd_report(const RunConfig& c, std::ostream& out, std::ostream& err) {
    auto records = load_records(c, err);
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.epsilon < b.epsilon; });
    if (!c.plot.empty()) {
        std::ofstream os(c.plot);
        if (!os) throw IoError("cannot write " + c.plot);
        os << std::setprecision(17) << "eps_pow,log_t_est,epsilon,reliable\n";
        for (const auto& r : records)
            os << regressor(ScalingModel::exp_crit, r.epsilon, r.p) << ',' << std::log(r.t_est) << ','
               << r.epsilon << ',' << (r.reliable ? 1 : 0) << '\n';
    }
    Json arr = Json::array();
    for (const auto& r : records)
        arr.push_back({{"epsilon", r.epsilon},
                       {"t_est", r.t_est},
                       {"err", r.err},
                       {"reliable", r.reliable},
                       {"diagnostics", r.diagnostics}});
    if (c.json) {
        out << arr.dump(2) << '\n';
    } else {
        out << std::setw(12) << "epsilon" << std::setw(14) << "t_est" << std::setw(12) << "err"
            << std::setw(10) << "reliable" << '\n';
        for (const auto& r : records)
            out << std::setw(12) << r.epsilon << std::setw(14) << r.t_est << std::setw(12) << r.err
                << std::setw(10) << (r.reliable ? "yes" : "no") << '\n';
    }
    return kOk;
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"critwave: blow-up and lifespan laboratory for the critical semilinear wave equation"};
    app.name(args.empty() ? "critwave" : args.front());
    // -h would collide with the grid spacing option --h.
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; CRITWAVE_* variables and flags override it");

    std::map<std::string, std::string> values;  // key -> raw flag text
    std::map<std::string, CLI::App*> subs;
    for (const auto& cmd : commands()) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.description);
        subs[cmd.name] = sub;
        for (const auto& key : cmd.keys) {
            std::string names = "--" + key;
            if (dashed(key) != key) names += ",--" + dashed(key);
            const std::string help = RunConfig::help(key) + " [" + RunConfig{}.get(key) + "]";
            if (is_flag(key)) {
                sub->add_flag_callback(names, [&values, key] { values[key] = "true"; }, help);
            } else {
                sub->add_option_function<std::string>(names, [&values, key](const std::string& v) { values[key] = v; },
                                                      help);
            }
        }
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kBadInput;
    }

    std::string chosen;
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) chosen = name;

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg.load_file(config_path);
        cfg.apply_env();
        for (const auto& [k, v] : values) cfg.set(k, v);

        if (chosen == "constants") return cmd_constants(cfg, out);
        if (chosen == "odi") return cmd_odi(cfg, out);
        if (chosen == "simulate") return cmd_simulate(cfg, out);
        if (chosen == "check") return cmd_check(cfg, out);
        if (chosen == "sweep") return cmd_sweep(cfg, out, err);
        if (chosen == "fit") return cmd_fit(cfg, out, err);
        if (chosen == "report") return cmd_report(cfg, out, err);
        err << app.help();
        return kBadInput;
    } catch (const ParameterError& e) {
        err << "parameter error: " << e.what() << '\n';
    } catch (const IoError& e) {
        err << "input error: " << e.what() << '\n';
    } catch (const FitError& e) {
        err << "fit error: " << e.what() << '\n';
    } catch (const PreconditionError& e) {
        err << "precondition error: " << e.what() << '\n';
    } catch (const InstabilityError& e) {
        err << "numerical instability: " << e.what() << '\n';
    }
    return kBadInput;
}

int dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args(argv, argv + argc);
    return dispatch(args, std::cout, std::cerr);
}

} // namespace critwave::cli
