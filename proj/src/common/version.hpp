#pragma once

namespace pgvlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pgvlab
