#pragma once

namespace jnr {

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

} // namespace jnr
