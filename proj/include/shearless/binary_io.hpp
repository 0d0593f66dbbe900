#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <vector>

namespace shearless::io {

/// Write doubles as little-endian IEEE-754 binary64.
inline void write_le_f64(std::ostream& out, const std::vector<double>& values) {
  for (double v : values) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
  }
}

/// Read exactly n little-endian binary64 values; returns false on short input.
inline bool read_le_f64(std::istream& in, std::size_t n, std::vector<double>& out) {
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    char buf[8];
    if (!in.read(buf, 8)) return false;
    std::uint64_t bits = 0;
    std::memcpy(&bits, buf, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    out[i] = std::bit_cast<double>(bits);
  }
  return true;
}

}  // namespace shearless::io
