#pragma once

namespace ada::cli {

/// Exit codes: 0 success, 2 input or validation error, 3 LM endpoint failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitDependency = 3;

int run(int argc, char** argv);

}  // namespace ada::cli
