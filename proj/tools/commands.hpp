#pragma once

namespace gridsec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDetected = 1;
inline constexpr int kExitUsage = 2;

int run(int argc, char** argv);

}  // namespace gridsec::cli
