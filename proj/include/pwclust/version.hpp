#pragma once

namespace pwclust {

inline constexpr const char* kVersion = "0.1.0";
/// Version of the scene file format (`schema` field).
inline constexpr int kSchemaVersion = 1;

}  // namespace pwclust
