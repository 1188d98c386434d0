#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ppls/bn.hpp"
#include "ppls/rng.hpp"

namespace ppls {

struct RsaPublicKey {
  Bn n;
  Bn e;

  friend bool operator==(const RsaPublicKey&, const RsaPublicKey&) = default;
};

struct RsaKeypair {
  RsaPublicKey pub;
  Bn d;
  Bn p;
  Bn q;
};

/// Envelope for payloads of arbitrary length: a fresh 32-byte secret
/// (16-byte cipher key + 16-byte MAC key) wrapped under RSA, then an
/// AES-128-CTR body with a CMAC tag appended.
struct HybridCiphertext {
  std::vector<std::uint8_t> wrapped_key;
  std::array<std::uint8_t, 12> nonce{};
  std::vector<std::uint8_t> body;

  friend bool operator==(const HybridCiphertext&, const HybridCiphertext&) = default;
};

struct Signature {
  Bn value;

  friend bool operator==(const Signature&, const Signature&) = default;
};

using EpochKey = std::array<std::uint8_t, 16>;

/// Per-epoch PRF image of a vehicle identity; 128 bits, hex on the wire.
struct PseudoIdentity {
  std::array<std::uint8_t, 16> bytes{};

  std::string hex() const;
  static std::optional<PseudoIdentity> from_hex(std::string_view s);

  friend bool operator==(const PseudoIdentity&, const PseudoIdentity&) = default;
  friend auto operator<=>(const PseudoIdentity&, const PseudoIdentity&) = default;
};

RsaKeypair asym_keygen(unsigned bits, Rng& rng);

/// Test hook: fixed primes and exponent (e.g. p=61, q=53, e=17).
RsaKeypair rsa_keypair_from(const Bn& p, const Bn& q, const Bn& e);

HybridCiphertext asym_encrypt(const RsaPublicKey& pk, std::span<const std::uint8_t> payload,
                              Rng& rng);
std::vector<std::uint8_t> asym_decrypt(const RsaKeypair& sk, const HybridCiphertext& ct);

/// Raw-block school RSA, kept as a test hook for oracle-sized keys.
Bn rsa_encrypt_raw(const RsaPublicKey& pk, const Bn& m);
Bn rsa_decrypt_raw(const RsaKeypair& sk, const Bn& c);

/// Payload layout of a public key inside C_pk_s(pk_u): u32-length-prefixed
/// big-endian n, then e. Both the vehicle (encrypting) and the location
/// server (decrypting) use this.
std::vector<std::uint8_t> rsa_pub_to_bytes(const RsaPublicKey& pk);
RsaPublicKey rsa_pub_from_bytes(std::span<const std::uint8_t> bytes);

/// RSA PKCS#1 v1.5 signature over SHA-256 of the message.
Signature sign(const RsaKeypair& sk, std::span<const std::uint8_t> message);
bool verify(const RsaPublicKey& pk, std::span<const std::uint8_t> message, const Signature& sig);

/// Block-cipher PRF of an identity under the epoch key (AES-CMAC).
PseudoIdentity pid_derive(std::string_view id, const EpochKey& epoch_key);

}  // namespace ppls
