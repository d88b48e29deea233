#pragma once

namespace hubreg {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace hubreg
