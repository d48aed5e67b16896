#pragma once

namespace qtraj {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "qtraj 0.1.0";

} // namespace qtraj
