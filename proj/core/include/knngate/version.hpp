#pragma once

namespace knngate {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace knngate
