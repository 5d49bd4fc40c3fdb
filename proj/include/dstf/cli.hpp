#pragma once

#include <string>
#include <vector>

namespace dstf::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDataError = 2;
inline constexpr int kInconsistent = 3;
inline constexpr int kPseudoResult = 4;
inline constexpr int kReject = 5;
inline constexpr int kGateFailure = 6;

// Runs the command line (without argv[0]); returns the process exit code.
int run(const std::vector<std::string>& args);

}  // namespace dstf::cli
