#pragma once

namespace hypf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hypf
