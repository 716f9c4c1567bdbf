#include "critwave/io.hpp"

#include "critwave/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>

namespace critwave {

namespace {

constexpr const char* kTraceHeader = "t,F,Fp,Lp_p,sup_norm,support_radius";

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << std::setprecision(17);
    return os;
}

double parse_double(std::string_view field, std::size_t line) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw IoError("line " + std::to_string(line) + ": not a number: '" + std::string(field) + "'");
    return v;
}

// JSON has no inf/nan; they are written as null and read back as +inf.
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <class T>
T field(const Json& j, const char* key) {
    if (!j.contains(key)) throw IoError(std::string("record is missing '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw IoError(std::string("record field '") + key + "': " + e.what());
    }
}

} // namespace

void write_trace_csv(std::ostream& os, const SolutionTrace& tr) {
    const auto old = os.precision(17);
    os << kTraceHeader << '\n';
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        os << tr.times[k] << ',' << tr.F[k] << ',' << tr.Fp[k] << ',' << tr.Lp_p[k] << ','
           << tr.sup_norm[k] << ',' << tr.support_radius[k] << '\n';
    }
    os.precision(old);
}

void write_trace_csv(const std::filesystem::path& path, const SolutionTrace& trace) {
    auto os = open_out(path);
    write_trace_csv(os, trace);
}

SolutionTrace read_trace_csv(std::istream& is) {
    SolutionTrace tr;
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty trace file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceHeader) throw IoError("unexpected trace header: " + line);
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        double v[6];
        std::string_view rest(line);
        for (int c = 0; c < 6; ++c) {
            const auto comma = rest.find(',');
            if ((c < 5) != (comma != std::string_view::npos))
                throw IoError("line " + std::to_string(lineno) + ": expected 6 columns");
            v[c] = parse_double(rest.substr(0, comma), lineno);
            if (c < 5) rest.remove_prefix(comma + 1);
        }
        if (!tr.times.empty() && !(v[0] > tr.times.back()))
            throw IoError("line " + std::to_string(lineno) + ": times must increase");
        tr.times.push_back(v[0]);
        tr.F.push_back(v[1]);
        tr.Fp.push_back(v[2]);
        tr.Lp_p.push_back(v[3]);
        tr.sup_norm.push_back(v[4]);
        tr.support_radius.push_back(v[5]);
    }
    if (tr.times.empty()) throw IoError("trace file has no data rows");
    tr.t_end = tr.times.back();
    tr.initial_sup = tr.sup_norm.front();
    return tr;
}

SolutionTrace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    return read_trace_csv(is);
}

void write_odi_csv(const std::filesystem::path& path, const OdiTrace& tr) {
    auto os = open_out(path);
    os << "t,G,Gp\n";
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        os << tr.times[k] << ',' << tr.G[k] << ',' << tr.Gp[k] << '\n';
}

Json to_json(const ConstantLedger& L) {
    return Json{{"n", L.n},       {"p", num(L.p)},   {"R", num(L.R)},     {"epsilon", num(L.epsilon)},
                {"a", num(L.a)},  {"q", num(L.q)},   {"C", num(L.C)},     {"C0", num(L.C0)},
                {"Cp", num(L.Cp)}, {"C1", num(L.C1)}, {"log_C1", num(L.log_C1)}, {"D", num(L.D)},
                {"S_inf", num(L.S_inf)}, {"delta", num(L.delta)}, {"B", num(L.B)},
                {"K0", num(L.K0)}, {"E", num(L.E)}};
}

Json to_json(const LifespanBound& b) {
    return Json{{"log_T0", num(b.log_T0)},
                {"log_T_upper", num(b.log_T_upper)},
                {"T0", num(b.T0)},
                {"T_upper", num(b.T_upper)}};
}

Json to_json(const BlowupVerdict& v) {
    return Json{{"K_measured", num(v.K_measured)},
                {"K0", num(v.K0)},
                {"T1", num(v.T1)},
                {"bound", num(v.bound)},
                {"blown_up", v.blown_up},
                {"t_blow", num(v.t_blow)},
                {"t_blow_error", num(v.t_blow_error)},
                {"hypothesis_met", v.hypothesis_met},
                {"bound_respected", v.bound_respected},
                {"growth_ok", v.growth_ok}};
}

Json to_json(const BoundReport& r) {
    return Json{{"name", r.name},
                {"validity_start", num(r.validity_start)},
                {"inf_ratio", num(r.inf_ratio)},
                {"passed", r.passed},
                {"samples", r.samples},
                {"applicable", r.applicable},
                {"note", r.note}};
}

Json to_json(const LifespanRecord& r) {
    Json grids = Json::array();
    for (const auto& g : r.grid_meta)
        grids.push_back({{"h", g.h},
                         {"blew_up", g.blew_up},
                         {"t_est", num(g.t_est)},
                         {"t_est_doubled", num(g.t_est_doubled)},
                         {"steps", g.steps}});
    return Json{{"n", r.n},
                {"p", r.p},
                {"R", r.R},
                {"epsilon", r.epsilon},
                {"t_est", num(r.t_est)},
                {"err", num(r.err)},
                {"reliable", r.reliable},
                {"survived", r.survived},
                {"grid_meta", grids},
                {"runtime_s", r.runtime_s},
                {"diagnostics", r.diagnostics}};
}

Json trace_summary(const SolutionTrace& tr) {
    return Json{{"n", tr.n},
                {"p", tr.p},
                {"R", tr.R},
                {"epsilon", tr.epsilon},
                {"h", tr.h},
                {"L", tr.L},
                {"nonlinear", tr.nonlinear},
                {"outcome", tr.outcome == Outcome::blew_up ? "blew_up" : "survived"},
                {"t_end", tr.t_end},
                {"t_est", num(tr.t_est)},
                {"t_err", num(tr.t_err)},
                {"initial_sup", tr.initial_sup},
                {"steps", tr.steps},
                {"samples", tr.times.size()}};
}

LifespanRecord record_from_json(const Json& j) {
    if (!j.is_object()) throw IoError("record is not a JSON object");
    auto finite_or_inf = [&](const char* key) {
        if (!j.contains(key)) throw IoError(std::string("record is missing '") + key + "'");
        return j.at(key).is_null() ? std::numeric_limits<double>::infinity() : field<double>(j, key);
    };
    LifespanRecord r;
    r.n = field<int>(j, "n");
    r.p = field<double>(j, "p");
    r.R = field<double>(j, "R");
    r.epsilon = field<double>(j, "epsilon");
    r.t_est = finite_or_inf("t_est");
    r.err = finite_or_inf("err");
    r.reliable = field<bool>(j, "reliable");
    r.survived = field<bool>(j, "survived");
    r.runtime_s = field<double>(j, "runtime_s");
    r.diagnostics = field<std::string>(j, "diagnostics");
    const Json grids = field<Json>(j, "grid_meta");
    if (!grids.is_array()) throw IoError("grid_meta must be an array");
    for (const auto& g : grids) {
        GridRun gr;
        gr.h = field<double>(g, "h");
        gr.blew_up = field<bool>(g, "blew_up");
        constexpr double inf = std::numeric_limits<double>::infinity();
        gr.t_est = g.at("t_est").is_null() ? inf : field<double>(g, "t_est");
        gr.t_est_doubled = g.at("t_est_doubled").is_null() ? inf : field<double>(g, "t_est_doubled");
        gr.steps = field<long>(g, "steps");
        r.grid_meta.push_back(gr);
    }
    return r;
}

} // namespace critwave
