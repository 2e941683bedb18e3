#pragma once

namespace otlab {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kConfigSchema = "otlab-config/1";

}  // namespace otlab
