#pragma once

// CSV traces and JSON views of the result types. The JSON objects are flat
// where possible and use the symbol names of the underlying formulas as keys.

#include "critwave/bounds.hpp"
#include "critwave/exponents.hpp"
#include "critwave/odi.hpp"
#include "critwave/wavesim.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace critwave {

using Json = nlohmann::json;

/// Columns t, F, Fp, Lp_p, sup_norm, support_radius with a header row.
void write_trace_csv(std::ostream& os, const SolutionTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const SolutionTrace& trace);

/// Reads the six-column layout back. Metadata (n, p, R, ε) is not stored in
/// the file and must be set by the caller. Throws IoError on malformed input.
SolutionTrace read_trace_csv(std::istream& is);
SolutionTrace read_trace_csv(const std::filesystem::path& path);

/// Columns t, G, Gp.
void write_odi_csv(const std::filesystem::path& path, const OdiTrace& trace);

Json to_json(const ConstantLedger& ledger);
Json to_json(const LifespanBound& bound);
Json to_json(const BlowupVerdict& verdict);
Json to_json(const BoundReport& report);
Json to_json(const LifespanRecord& record);
Json trace_summary(const SolutionTrace& trace);

/// Inverse of to_json(LifespanRecord). Throws IoError on missing or mistyped fields.
LifespanRecord record_from_json(const Json& j);

} // namespace critwave
