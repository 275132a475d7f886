#include "ndiff/checkpoint.hpp"

#include "common/error.hpp"

#include <cstring>
#include <istream>
#include <ostream>

namespace pgvlab::ndiff {

namespace {

constexpr char kMagic[8] = {'P', 'G', 'V', 'P', 'A', 'R', 'A', 'M'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
  if (!out) throw IoError("checkpoint: write failed");
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("checkpoint: truncated input");
  return v;
}

}  // namespace

void write_u32(std::ostream& out, std::uint32_t v) { put(out, v); }
void write_f64(std::ostream& out, double v) { put(out, v); }
std::uint32_t read_u32(std::istream& in) { return get<std::uint32_t>(in); }
double read_f64(std::istream& in) { return get<double>(in); }

void write_params(std::ostream& out, const ParamVector& params) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kParamFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.layout().size()));
  for (const Segment& s : params.layout()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.name.size()));
    out.write(s.name.data(), static_cast<std::streamsize>(s.name.size()));
    put<std::int64_t>(out, s.rows);
    put<std::int64_t>(out, s.cols);
  }
  put<std::uint64_t>(out, params.size());
  out.write(reinterpret_cast<const char*>(params.values().data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (!out) throw IoError("checkpoint: write failed");
}

void read_params(std::istream& in, ParamVector& into) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw IoError("checkpoint: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kParamFormatVersion)
    throw IoError("checkpoint: unsupported format version " + std::to_string(version));
  const auto count = get<std::uint32_t>(in);
  if (count != into.layout().size()) throw IoError("checkpoint: segment count does not match");
  for (const Segment& s : into.layout()) {
    const auto len = get<std::uint32_t>(in);
    std::string name(len, '\0');
    in.read(name.data(), len);
    const auto rows = get<std::int64_t>(in);
    const auto cols = get<std::int64_t>(in);
    if (!in || name != s.name || rows != s.rows || cols != s.cols)
      throw IoError("checkpoint: layout mismatch at segment '" + s.name + "'");
  }
  const auto n = get<std::uint64_t>(in);
  if (n != into.size()) throw IoError("checkpoint: value count does not match");
  in.read(reinterpret_cast<char*>(into.values().data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw IoError("checkpoint: truncated values");
}

}  // namespace pgvlab::ndiff
