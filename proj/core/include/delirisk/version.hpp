#pragma once

namespace delirisk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace delirisk
