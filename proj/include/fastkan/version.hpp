#pragma once

namespace fastkan {

inline constexpr const char* kVersion = "0.1.0";

} // namespace fastkan
