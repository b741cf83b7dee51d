#pragma once

namespace dagsmooth {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dagsmooth
