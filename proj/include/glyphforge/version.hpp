#pragma once

namespace glyphforge {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace glyphforge
