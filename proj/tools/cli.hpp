#pragma once

namespace tfw::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitThresholdFailure = 2;

/// Entry point of the tfw tool; returns the process exit code.
int cli_main(int argc, char const* const* argv);

}  // namespace tfw::cli
