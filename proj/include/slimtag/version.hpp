#pragma once

namespace slimtag {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "slimtag";

}  // namespace slimtag
