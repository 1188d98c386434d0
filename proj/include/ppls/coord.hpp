#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "ppls/error.hpp"

namespace ppls {

constexpr std::uint32_t kCoordLimit = 1'000'000;

/// Planar position in integer meters, 0 <= x, y < 10^6.
struct Coord {
  std::uint32_t x = 0;
  std::uint32_t y = 0;

  friend bool operator==(const Coord&, const Coord&) = default;
};

inline std::uint64_t isqrt_u64(std::uint64_t v) {
  if (v == 0) return 0;
  auto r = static_cast<std::uint64_t>(__builtin_sqrt(static_cast<double>(v)));
  while (r > 0 && r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

/// Floor of the Euclidean distance; exact integer arithmetic, symmetric.
inline std::uint32_t distance(Coord a, Coord b) {
  std::int64_t dx = std::int64_t(a.x) - std::int64_t(b.x);
  std::int64_t dy = std::int64_t(a.y) - std::int64_t(b.y);
  return static_cast<std::uint32_t>(isqrt_u64(std::uint64_t(dx * dx + dy * dy)));
}

/// Canonical 8-byte serialization: x then y, each 32-bit big-endian.
inline std::array<std::uint8_t, 8> coord_bytes(Coord c) {
  return {std::uint8_t(c.x >> 24), std::uint8_t(c.x >> 16), std::uint8_t(c.x >> 8), std::uint8_t(c.x),
          std::uint8_t(c.y >> 24), std::uint8_t(c.y >> 16), std::uint8_t(c.y >> 8), std::uint8_t(c.y)};
}

inline Coord parse_coord(std::span<const std::uint8_t> b) {
  if (b.size() != 8) fail(Err::DecryptionFailure, "coordinate payload must be 8 bytes");
  Coord c;
  c.x = (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | b[3];
  c.y = (std::uint32_t(b[4]) << 24) | (std::uint32_t(b[5]) << 16) | (std::uint32_t(b[6]) << 8) | b[7];
  return c;
}

}  // namespace ppls
