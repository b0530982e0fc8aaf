#pragma once

namespace spinmoments {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace spinmoments
