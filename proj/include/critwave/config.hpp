#pragma once

// Every tunable of every subcommand in one flat record. Values are layered:
// built-in defaults, then a JSON config file, then CRITWAVE_* environment
// variables, then command-line flags.

#include "critwave/exponents.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace critwave {

// X(type, name, default, help)
#define CRITWAVE_CONFIG_FIELDS(X)                                                          \
    X(int, n, 4, "spatial dimension")                                                      \
    X(std::string, p, "crit", "exponent p, or 'crit' for the critical exponent of n")      \
    X(double, R, 0.5, "support radius of the data")                                        \
    X(double, eps, 1.0, "data amplitude epsilon")                                          \
    X(int, m, 4, "smoothness order of the bump profile")                                   \
    X(double, weight_f, 1.0, "integral of f at epsilon = 1")                               \
    X(double, weight_g, 1.0, "integral of g at epsilon = 1")                               \
    X(double, C, 1.0, "iteration constant C for the ledger")                               \
    X(double, delta, 0.0, "delta in (0, (p-1)/2); 0 selects (p-1)/4")                      \
    X(double, h, 0.02, "radial grid spacing")                                              \
    X(double, L, 0.0, "domain radius; 0 picks one from tmax and R")                        \
    X(double, tmax, 10.0, "final time")                                                    \
    X(double, cfl, 0.5, "time step over grid spacing")                                     \
    X(double, sample_dt, 0.05, "trace sampling interval")                                  \
    X(double, blow_factor, 1e6, "blow-up threshold relative to the initial sup norm")      \
    X(bool, linear, false, "switch the nonlinearity off")                                  \
    X(double, B, 1.0, "ODI coefficient B")                                                 \
    X(double, q, 0.0, "ODI weight power q")                                                \
    X(double, G0, 6.0, "ODI initial value G(0)")                                           \
    X(double, G0p, 12.0, "ODI initial slope G'(0)")                                        \
    X(double, T0, 1.0, "ODI hypothesis onset time T0")                                     \
    X(int, suite, 0, "run a randomized lemma suite of this size")                          \
    X(std::int64_t, seed, 1, "random seed for the lemma suite")                            \
    X(int, j, 3, "largest iteration index checked")                                        \
    X(double, eps_from, 1.9, "first epsilon of the sweep grid")                            \
    X(double, eps_to, 1.25, "last epsilon of the sweep grid")                              \
    X(int, points, 9, "number of sweep points")                                            \
    X(int, refinements, 2, "grids per lifespan estimate (2 or 3)")                         \
    X(double, accept_tol, 0.1, "relative error bar above which a record is unreliable")    \
    X(int, workers, 0, "sweep worker threads; 0 uses all cores")                           \
    X(std::string, model, "all", "exp_crit, power, exp_yz, or all for a ranking")          \
    X(std::string, trace, "", "trace CSV path (output for simulate/odi, input for check)") \
    X(std::string, in, "", "input JSONL of lifespan records")                              \
    X(std::string, out, "", "output JSONL log for sweep")                                  \
    X(std::string, plot, "", "CSV path for report plot data")                              \
    X(bool, json, false, "machine-readable output only")

struct RunConfig {
#define CRITWAVE_DECLARE(type, name, def, help) type name = def;
    CRITWAVE_CONFIG_FIELDS(CRITWAVE_DECLARE)
#undef CRITWAVE_DECLARE

    bool operator==(const RunConfig&) const = default;

    /// Names of all keys in declaration order.
    static const std::vector<std::string>& keys();
    static std::string help(const std::string& key);

    /// Parses `value` into the field `key`. Throws ParameterError for unknown
    /// keys or unparsable values.
    void set(const std::string& key, const std::string& value);
    [[nodiscard]] std::string get(const std::string& key) const;

    [[nodiscard]] nlohmann::json to_json() const;
    /// Starts from defaults; rejects unknown keys and mistyped values.
    static RunConfig from_json(const nlohmann::json& j);

    void load_file(const std::filesystem::path& path);
    void save_file(const std::filesystem::path& path) const;

    /// Applies CRITWAVE_<KEY> variables (key upper-cased) that are set.
    void apply_env();

    /// p as a number; "crit" resolves through p_crit(n).
    [[nodiscard]] double resolved_p() const;
    [[nodiscard]] ModelParams model_params() const;
};

/// Environment variable consulted for `key`.
std::string env_name(const std::string& key);

} // namespace critwave
