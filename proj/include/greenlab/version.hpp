#pragma once

namespace greenlab {

inline constexpr const char* kToolName = "greenlab";
inline constexpr const char* kVersion = "0.1.0";

} // namespace greenlab
