#pragma once

namespace gridlock {

inline constexpr const char* kToolName = "gridlock";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace gridlock
