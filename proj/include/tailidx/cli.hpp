#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tailidx::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationError = 2;
inline constexpr int kComputationError = 3;

// Environment variable naming the directory that relative --out paths are
// resolved against.
inline constexpr const char* kOutputDirEnv = "TAILIDX_OUTPUT_DIR";

// Runs one command line (without the program name).  Results go to `out`
// unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tailidx::cli
