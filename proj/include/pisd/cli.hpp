#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pisd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

// Runs the command line `args` (without the program name). Output CSVs go to
// --out or, if absent, to `out`; diagnostics and usage go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pisd::cli
