#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace oanbv {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitGeneration = 3;

inline constexpr const char* kVersion = "0.1.0";

/// Runs the command line (args excludes the program name). Artifacts are
/// written only after the whole command succeeds.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace oanbv
