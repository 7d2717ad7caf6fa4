#pragma once

#include <string>
#include <vector>

namespace plseada::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitMissing = 4;

/// Parses and runs one command; returns the process exit code. Errors are
/// reported on stderr.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace plseada::cli
