#include "critwave/errors.hpp"
#include "critwave/io.hpp"
#include "critwave/sweep.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

using namespace critwave;
namespace fs = std::filesystem;

namespace {

std::vector<LifespanRecord> synthetic(double p, const std::vector<double>& eps, auto&& logT) {
    std::vector<LifespanRecord> out;
    for (double e : eps) {
        LifespanRecord r;
        r.n = 4;
        r.p = p;
        r.R = 1.0;
        r.epsilon = e;
        r.t_est = std::exp(logT(e));
        r.reliable = true;
        out.push_back(r);
    }
    return out;
}

ModelParams fast_params() {
    ModelParams mp;
    mp.n = 4;
    mp.p = 1.5;
    mp.R = 0.5;
    return mp;
}

SweepOptions fast_options(const fs::path& log) {
    SweepOptions o;
    o.lifespan.h = 0.08;
    o.lifespan.t_max = 60.0;
    o.lifespan.sample_dt = 0.5;
    o.workers = 3;
    o.log = log;
    return o;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "critwave_sweep_tests";
    fs::create_directories(dir);
    const auto p = dir / name;
    fs::remove(p);
    return p;
}

} // namespace

TEST_CASE("geometric grid") {
    const auto g = geometric_grid(1.0, 8.0, 4);
    REQUIRE(g.size() == 4);
    CHECK(g[0] == 1.0);
    CHECK(g[1] == doctest::Approx(2.0));
    CHECK(g[2] == doctest::Approx(4.0));
    CHECK(g[3] == 8.0);
    CHECK(geometric_grid(3.0, 3.0, 1) == std::vector<double>{3.0});
    CHECK_THROWS_AS(geometric_grid(0.0, 1.0, 3), ParameterError);
    CHECK_THROWS_AS(geometric_grid(1.0, 2.0, 0), ParameterError);
}

TEST_CASE("exact synthetic data are recovered by each model") {
    const std::vector<double> eps = geometric_grid(0.6, 1.5, 9);
    for (double p : {1.5, 2.0, 3.0}) {
        for (auto model : {ScalingModel::exp_crit, ScalingModel::power, ScalingModel::exp_yz}) {
            const double alpha = model == ScalingModel::power ? 2.0 / (p - 1.0) : 0.37;
            const double beta = -1.25;
            const auto recs = synthetic(p, eps, [&](double e) { return alpha * regressor(model, e, p) + beta; });
            const auto f = fit(recs, model);
            CAPTURE(to_string(model));
            CAPTURE(p);
            CHECK(std::abs(f.r2 - 1.0) <= 1e-10);
            CHECK(f.slope == doctest::Approx(alpha).epsilon(1e-8));
            CHECK(f.intercept == doctest::Approx(beta).epsilon(1e-8));
            CHECK(f.rss <= 1e-18);
            CHECK(f.n_points == 9);
        }
    }
}

TEST_CASE("noisy data rank the generating model first") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 0.01);
    const std::vector<double> eps = geometric_grid(0.4, 1.2, 10);
    const double p = 2.0;
    const auto recs = synthetic(p, eps, [&](double e) { return 0.8 * std::pow(e, -p * (p - 1.0)) + noise(rng); });
    const auto cmp = compare_models(recs, p);
    REQUIRE(cmp.conclusive);
    REQUIRE(cmp.ranking.size() == 3);
    CHECK(cmp.ranking[0].model == ScalingModel::exp_crit);
    CHECK(cmp.ranking[0].rss <= cmp.ranking[1].rss);
    CHECK(cmp.ranking[1].rss <= cmp.ranking[2].rss);
    CHECK(cmp.verdict.find("exp_crit ranked first") == 0);

    const auto pw = synthetic(1.5, eps, [&](double e) { return -4.0 * std::log(e) + 1.0 + noise(rng); });
    CHECK(compare_models(pw, 1.5).ranking[0].model == ScalingModel::power);
}

TEST_CASE("comparison preconditions") {
    const auto few = synthetic(2.0, geometric_grid(0.5, 2.0, 5), [](double e) { return 1.0 / e; });
    const auto c1 = compare_models(few, 2.0);
    CHECK_FALSE(c1.conclusive);
    CHECK(c1.verdict.find("inconclusive") == 0);
    CHECK(c1.ranking.empty());

    const auto narrow = synthetic(2.0, geometric_grid(1.0, 1.9, 8), [](double e) { return 1.0 / e; });
    CHECK_FALSE(compare_models(narrow, 2.0).conclusive);

    // unreliable records do not count
    auto mixed = synthetic(2.0, geometric_grid(0.5, 2.0, 8), [](double e) { return 1.0 / e; });
    for (std::size_t i = 0; i < 3; ++i) mixed[i].reliable = false;
    CHECK_FALSE(compare_models(mixed, 2.0).conclusive);
}

TEST_CASE("fit errors") {
    const auto three = synthetic(2.0, {0.5, 1.0, 2.0}, [](double e) { return e; });
    CHECK_THROWS_AS(fit(three, ScalingModel::power), FitError);
    CHECK_THROWS_AS(fit_points({1.0, 1.0, 1.0, 1.0}, {2.0, 3.0, 4.0, 5.0}, 2.0, ScalingModel::power), FitError);
    CHECK_THROWS_AS(fit_points({1.0, 2.0, 3.0, 4.0}, {2.0, -3.0, 4.0, 5.0}, 2.0, ScalingModel::power), FitError);
    CHECK_THROWS_AS(fit_points({1.0, 2.0}, {2.0}, 2.0, ScalingModel::power), FitError);
    auto mixed = synthetic(2.0, {0.5, 1.0, 2.0, 3.0}, [](double e) { return e; });
    mixed[0].p = 1.5;
    CHECK_THROWS_AS(fit(mixed, ScalingModel::power), FitError);
    CHECK_THROWS_AS(parse_model("quadratic"), ParameterError);
    CHECK(parse_model("exp_yz") == ScalingModel::exp_yz);
}

TEST_CASE("sweep records are sorted, deduplicated and blow up earlier for larger data") {
    auto opt = fast_options({});
    const auto res = run_sweep(fast_params(), {4.0, 1.0, 2.0, 2.0 * (1 + 1e-14)}, opt);
    CHECK(res.warnings.size() == 1);
    REQUIRE(res.records.size() == 3);
    CHECK(res.computed == 3);
    for (std::size_t i = 1; i < res.records.size(); ++i) {
        CHECK(res.records[i].epsilon > res.records[i - 1].epsilon);
        CHECK(res.records[i].t_est < res.records[i - 1].t_est);
    }
    CHECK_THROWS_AS(run_sweep(fast_params(), {}, opt), ParameterError);
    CHECK_THROWS_AS(run_sweep(fast_params(), {1.0, -1.0}, opt), ParameterError);
}

TEST_CASE("interrupted sweep resumes to the same canonical log") {
    const std::vector<double> eps = geometric_grid(0.8, 4.0, 6);
    const auto full_log = scratch("full.jsonl");
    const auto full = run_sweep(fast_params(), eps, fast_options(full_log));
    CHECK(full.computed == 6);

    const auto log = scratch("resume.jsonl");
    auto opt = fast_options(log);
    opt.stop_after = 2;
    const auto part = run_sweep(fast_params(), eps, opt);
    CHECK(part.interrupted);
    CHECK(read_records(log).size() == 2);

    // simulate a crash in the middle of writing a line
    {
        std::ofstream os(log, std::ios::app);
        os << "{\"n\": 4, \"p\": 1.5, \"eps";
    }
    opt.stop_after = -1;
    const auto rest = run_sweep(fast_params(), eps, opt);
    CHECK(rest.resumed == 2);
    CHECK(rest.computed == 4);
    CHECK_FALSE(rest.interrupted);
    CHECK(rest.records.size() == 6);

    std::vector<std::string> warnings;
    const auto merged = read_records(log, &warnings);
    CHECK(merged.size() == 6);
    CHECK(warnings.size() == 1);
    CHECK(canonical_jsonl(merged) == canonical_jsonl(read_records(full_log)));

    // a third run finds everything already done
    const auto again = run_sweep(fast_params(), eps, opt);
    CHECK(again.computed == 0);
    CHECK(again.resumed == 6);
}

TEST_CASE("resume ignores records of other parameters") {
    const auto log = scratch("other.jsonl");
    run_sweep(fast_params(), {2.0}, fast_options(log));
    ModelParams other = fast_params();
    other.R = 0.6;
    const auto res = run_sweep(other, {2.0}, fast_options(log));
    CHECK(res.resumed == 0);
    CHECK(res.computed == 1);
    CHECK(read_records(log).size() == 2);
}

TEST_CASE("canonical form drops wall time and sorts") {
    auto recs = synthetic(2.0, {2.0, 0.5, 1.0}, [](double e) { return e; });
    auto other = recs;
    for (std::size_t i = 0; i < recs.size(); ++i) recs[i].runtime_s = 0.1 * i, other[i].runtime_s = 7.0;
    std::swap(other[0], other[2]);
    const auto c = canonical_jsonl(recs);
    CHECK(c == canonical_jsonl(other));
    CHECK(c.find("runtime_s") == std::string::npos);
    std::istringstream is(c);
    std::string line;
    double prev = 0.0;
    int lines = 0;
    while (std::getline(is, line)) {
        const double e = Json::parse(line).at("epsilon").get<double>();
        CHECK(e > prev);
        prev = e;
        ++lines;
    }
    CHECK(lines == 3);
}

TEST_CASE("record JSON round trip keeps infinities") {
    LifespanRecord r;
    r.n = 4;
    r.p = 2.0;
    r.R = 0.5;
    r.epsilon = 0.1;
    r.t_est = 100.0;
    r.err = std::numeric_limits<double>::infinity();
    r.survived = true;
    r.grid_meta.push_back({0.1, false, 100.0, 100.0, 42});
    const Json j = to_json(r);
    CHECK(j.at("err").is_null());
    const auto back = record_from_json(j);
    CHECK(std::isinf(back.err));
    CHECK(back.t_est == 100.0);
    CHECK(back.grid_meta.size() == 1);
    CHECK(back.grid_meta[0].steps == 42);
    CHECK_THROWS_AS(record_from_json(Json{{"n", 4}}), IoError);
    CHECK_THROWS_AS(read_records("/nonexistent/dir/log.jsonl"), IoError);
}
