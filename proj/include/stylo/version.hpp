#pragma once

namespace stylo {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kMatrixSchemaVersion = 1;
inline constexpr int kModelSchemaVersion = 1;
inline constexpr int kProjectionSchemaVersion = 1;
inline constexpr int kManifestSchemaVersion = 1;

}  // namespace stylo
