#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace ppls {

/// AES-128 block encryption (FIPS 197). Decryption is never needed: CTR and
/// CMAC both run the cipher forward only.
class Aes128 {
 public:
  explicit Aes128(const std::uint8_t key[16]);
  void encrypt_block(const std::uint8_t in[16], std::uint8_t out[16]) const;

 private:
  std::array<std::uint32_t, 44> rk_{};
};

/// CTR keystream XOR: block counter is a 32-bit big-endian count appended to
/// the 12-byte nonce. Encrypt and decrypt are the same operation.
void aes128_ctr_xor(const std::uint8_t key[16], const std::uint8_t nonce[12],
                    std::span<const std::uint8_t> in, std::uint8_t* out);

/// AES-CMAC (RFC 4493).
std::array<std::uint8_t, 16> aes128_cmac(const std::uint8_t key[16],
                                         std::span<const std::uint8_t> msg);

}  // namespace ppls
