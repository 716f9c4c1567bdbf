#pragma once

// ε-sweeps of the lifespan estimate with an append-only JSONL log, and
// least-squares fits of competing scaling laws for log T(ε).

#include "critwave/exponents.hpp"
#include "critwave/wavesim.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace critwave {

/// `points` values from `from` to `to` (either order), equal ratios.
std::vector<double> geometric_grid(double from, double to, int points);

struct SweepOptions {
    LifespanControls lifespan{};
    int workers = 0;                     ///< 0: hardware concurrency
    std::filesystem::path log;           ///< JSONL log; empty disables persistence and resume
    int stop_after = -1;                 ///< >= 0: stop after this many new records (simulated interruption)
};

struct SweepResult {
    std::vector<LifespanRecord> records;  ///< sorted by ε ascending
    std::vector<std::string> warnings;
    int resumed = 0;                      ///< records taken from an existing log
    int computed = 0;
    bool interrupted = false;
};

/// One lifespan() call per distinct ε, run on a worker pool. Every record is
/// appended to the log under a mutex as soon as it is finished. Records already
/// in the log (same ε, n, p, R) are reused; a malformed trailing line from an
/// interrupted write is skipped with a warning.
SweepResult run_sweep(const ModelParams& base, std::vector<double> eps_list, const SweepOptions& opt);

/// Parses a JSONL log, skipping malformed lines (reported through `warnings`).
std::vector<LifespanRecord> read_records(const std::filesystem::path& path,
                                         std::vector<std::string>* warnings = nullptr);

/// Order- and timing-independent text form: one JSON object per line with
/// sorted keys, runtime_s removed, lines sorted by ε.
std::string canonical_jsonl(std::vector<LifespanRecord> records);

enum class ScalingModel { exp_crit, power, exp_yz };

std::string to_string(ScalingModel m);
/// Throws ParameterError for unknown names.
ScalingModel parse_model(const std::string& name);

/// Regressor x(ε) of the linearized model log T = slope · x + β:
/// ε^{-p(p-1)} for exp_crit, -log ε for power, ε^{-p²} for exp_yz.
double regressor(ScalingModel m, double epsilon, double p);

struct FitResult {
    ScalingModel model = ScalingModel::exp_crit;
    double slope = 0.0;       ///< α, or κ for the power law
    double intercept = 0.0;   ///< β
    double r2 = 0.0;
    double rss = 0.0;
    std::vector<double> residuals;
    int n_points = 0;
};

/// Ordinary least squares on the reliable records. Needs at least 4 of them and
/// at least two distinct ε (FitError otherwise). All records must share p.
FitResult fit(const std::vector<LifespanRecord>& records, ScalingModel model);

/// Same fit with explicit p, for callers holding bare (ε, T) data.
FitResult fit_points(const std::vector<double>& eps, const std::vector<double>& T, double p,
                     ScalingModel model);

struct ModelComparison {
    bool conclusive = false;
    std::string verdict;                 ///< human-readable summary or the reason for inconclusiveness
    std::vector<FitResult> ranking;      ///< ascending RSS
};

/// Ranks the three two-parameter models by RSS. Inconclusive (not an error)
/// with fewer than 6 reliable records or when max ε / min ε < 2.
ModelComparison compare_models(const std::vector<LifespanRecord>& records, double p);

} // namespace critwave
