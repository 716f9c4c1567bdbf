#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace critwave::cli {

/// Exit codes of the front end.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kBadInput = 2;

/// Runs one command line (args[0] is the program name). Results go to `out`,
/// diagnostics and usage errors to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const* argv);

} // namespace critwave::cli
