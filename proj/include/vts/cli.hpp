#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace vts::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kValidation = 2, kRuntime = 3 };

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "VTS_OUT_DIR";

enum class Quantity { kTime, kLength, kSpeed };

/// Parses "10ns", "496us", "1.5h", "30cm", "110kmh", "25mps" into SI units
/// (s, m, m/s). A bare number is rejected as ambiguous.
double parse_quantity(std::string_view text, Quantity kind);

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vts::cli
