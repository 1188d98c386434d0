#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace ppls {

/// FIPS 180-4 SHA-256, used for signature digests and seed derivation.
class Sha256 {
 public:
  Sha256() { reset(); }
  void reset();
  void update(std::span<const std::uint8_t> data);
  std::array<std::uint8_t, 32> finish();

 private:
  void compress(const std::uint8_t block[64]);

  std::array<std::uint32_t, 8> h_{};
  std::uint64_t total_ = 0;
  std::uint8_t buf_[64] = {};
  std::size_t buffered_ = 0;
};

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);

}  // namespace ppls
