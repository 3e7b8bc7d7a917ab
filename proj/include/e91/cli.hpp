#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace e91::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidArguments = 2;
inline constexpr int kExitRuntimeError = 3;

/// Entry point of the e91sim tool. `args` excludes the program name.
///
///   run      --scenario S --rounds N --seed S [--angles a,a',b,b'] --out PATH
///            [--format json|csv] [--transcript PATH] [--timing-log PATH]
///            [--config FILE]   (options under a [run] section)
///   compare  REPORT REPORT...
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "θa,θa',θb,θb'" in radians. Throws std::invalid_argument.
std::vector<double> parse_angles(const std::string& text);

}  // namespace e91::cli
