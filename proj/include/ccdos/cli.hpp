#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ccdos::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNoCell = 4;

// Parses `args` (args[0] is the program name) and runs one subcommand:
// gen, fixture, score, bench or eval. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ccdos::cli
