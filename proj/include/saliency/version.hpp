#pragma once

namespace saliency {

inline constexpr const char* kToolName = "saliency";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace saliency
