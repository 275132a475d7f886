#pragma once

#include "ndiff/param_vector.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace pgvlab::ndiff {

// Parameter block byte layout (little-endian, host doubles):
//   char[8]   magic "PGVPARAM"
//   uint32    format version (1)
//   uint32    segment count K
//   K times:  uint32 name length, name bytes, int64 rows, int64 cols
//   uint64    value count n
//   n times:  float64 value
inline constexpr std::uint32_t kParamFormatVersion = 1;

void write_params(std::ostream& out, const ParamVector& params);

/// Reads a block written by write_params. The stored layout must equal the
/// layout of `into`; IoError otherwise.
void read_params(std::istream& in, ParamVector& into);

void write_u32(std::ostream& out, std::uint32_t v);
void write_f64(std::ostream& out, double v);
std::uint32_t read_u32(std::istream& in);
double read_f64(std::istream& in);

}  // namespace pgvlab::ndiff
