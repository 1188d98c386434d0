#include "ppls/asym.hpp"

#include <cstring>

#include "ppls/aes128.hpp"
#include "ppls/error.hpp"
#include "ppls/sha256.hpp"

namespace ppls {

namespace {

constexpr int kPrimalityRounds = 40;
constexpr std::size_t kEnvelopeSecretLen = 32;

// DER DigestInfo prefix for SHA-256 (PKCS#1 v1.5 signatures).
constexpr std::uint8_t kSha256Prefix[19] = {0x30, 0x31, 0x30, 0x0d, 0x06, 0x09, 0x60, 0x86, 0x48, 0x01,
                                            0x65, 0x03, 0x04, 0x02, 0x01, 0x05, 0x00, 0x04, 0x20};

Bn random_prime(unsigned bits, Rng& rng) {
  for (;;) {
    Bn cand = rng.bits(bits);
    cand.set_bit(bits - 1);
    cand.set_bit(0);
    Bn p = next_prime(cand);
    if (is_probable_prime(p, kPrimalityRounds)) return p;
  }
}

std::size_t modulus_len(const Bn& n) { return (n.bit_length() + 7) / 8; }

std::vector<std::uint8_t> left_pad(const Bn& v, std::size_t len) {
  auto raw = v.to_bytes_be();
  if (raw.size() > len) fail(Err::Internal, "value wider than modulus");
  std::vector<std::uint8_t> out(len, 0);
  std::copy(raw.begin(), raw.end(), out.begin() + (len - raw.size()));
  return out;
}

// EME-PKCS1-v1_5 padding: 00 02 <nonzero PS> 00 M.
Bn pkcs1_encrypt_block(const RsaPublicKey& pk, std::span<const std::uint8_t> m, Rng& rng) {
  std::size_t k = modulus_len(pk.n);
  if (m.size() + 11 > k) fail(Err::PlaintextOutOfRange, "payload too long for RSA block");
  std::vector<std::uint8_t> em(k);
  em[0] = 0x00;
  em[1] = 0x02;
  std::size_t ps_len = k - m.size() - 3;
  for (std::size_t i = 0; i < ps_len; ++i) {
    std::uint8_t b = 0;
    while (b == 0) b = static_cast<std::uint8_t>(rng.u32_below(256));
    em[2 + i] = b;
  }
  em[2 + ps_len] = 0x00;
  std::copy(m.begin(), m.end(), em.begin() + 3 + ps_len);
  return mod_exp(Bn::from_bytes_be(em), pk.e, pk.n);
}

std::vector<std::uint8_t> pkcs1_decrypt_block(const RsaKeypair& sk, const Bn& c) {
  if (!(c < sk.pub.n)) fail(Err::DecryptionFailure, "ciphertext outside modulus");
  std::size_t k = modulus_len(sk.pub.n);
  auto em = left_pad(mod_exp(c, sk.d, sk.pub.n), k);
  if (k < 11 || em[0] != 0x00 || em[1] != 0x02) fail(Err::DecryptionFailure, "bad padding");
  std::size_t sep = 0;
  for (std::size_t i = 2; i < k; ++i) {
    if (em[i] == 0x00) {
      sep = i;
      break;
    }
  }
  if (sep < 10) fail(Err::DecryptionFailure, "bad padding");
  return {em.begin() + sep + 1, em.end()};
}

}  // namespace

RsaKeypair asym_keygen(unsigned bits, Rng& rng) {
  if (bits < 64) fail(Err::ConfigInvalid, "rsa key size below 64 bits");
  Bn e(65537);
  for (;;) {
    Bn p = random_prime(bits / 2, rng);
    Bn q = random_prime(bits - bits / 2, rng);
    if (p == q) continue;
    Bn n = p * q;
    std::size_t len = n.bit_length();
    if (len + 1 < bits || len > bits + 1) continue;
    Bn phi = (p - 1u) * (q - 1u);
    Bn d;
    if (!coprime(e, phi) || !mod_inverse(e, phi, d)) continue;
    return RsaKeypair{RsaPublicKey{n, e}, d, p, q};
  }
}

RsaKeypair rsa_keypair_from(const Bn& p, const Bn& q, const Bn& e) {
  if (p == q || !is_probable_prime(p, kPrimalityRounds) || !is_probable_prime(q, kPrimalityRounds))
    fail(Err::ConfigInvalid, "p, q must be distinct primes");
  Bn phi = (p - 1u) * (q - 1u);
  Bn d;
  if (!coprime(e, phi) || !mod_inverse(e, phi, d))
    fail(Err::ConfigInvalid, "e not invertible mod (p-1)(q-1)");
  return RsaKeypair{RsaPublicKey{p * q, e}, d, p, q};
}

Bn rsa_encrypt_raw(const RsaPublicKey& pk, const Bn& m) {
  if (!(m < pk.n)) fail(Err::PlaintextOutOfRange, "m must lie below n");
  return mod_exp(m, pk.e, pk.n);
}

Bn rsa_decrypt_raw(const RsaKeypair& sk, const Bn& c) { return mod_exp(c, sk.d, sk.pub.n); }

namespace {

void put_block(std::vector<std::uint8_t>& out, const std::vector<std::uint8_t>& b) {
  std::uint32_t len = static_cast<std::uint32_t>(b.size());
  out.push_back(std::uint8_t(len >> 24));
  out.push_back(std::uint8_t(len >> 16));
  out.push_back(std::uint8_t(len >> 8));
  out.push_back(std::uint8_t(len));
  out.insert(out.end(), b.begin(), b.end());
}

std::span<const std::uint8_t> take_block(std::span<const std::uint8_t>& rest) {
  if (rest.size() < 4) fail(Err::DecryptionFailure, "public key payload truncated");
  std::uint32_t len = (std::uint32_t(rest[0]) << 24) | (std::uint32_t(rest[1]) << 16) |
                      (std::uint32_t(rest[2]) << 8) | rest[3];
  if (rest.size() < 4 + std::size_t(len)) fail(Err::DecryptionFailure, "public key payload truncated");
  auto b = rest.subspan(4, len);
  rest = rest.subspan(4 + len);
  return b;
}

}  // namespace

std::vector<std::uint8_t> rsa_pub_to_bytes(const RsaPublicKey& pk) {
  std::vector<std::uint8_t> out;
  put_block(out, pk.n.to_bytes_be());
  put_block(out, pk.e.to_bytes_be());
  return out;
}

RsaPublicKey rsa_pub_from_bytes(std::span<const std::uint8_t> bytes) {
  RsaPublicKey pk;
  pk.n = Bn::from_bytes_be(take_block(bytes));
  pk.e = Bn::from_bytes_be(take_block(bytes));
  if (!bytes.empty()) fail(Err::DecryptionFailure, "trailing bytes in public key payload");
  return pk;
}

HybridCiphertext asym_encrypt(const RsaPublicKey& pk, std::span<const std::uint8_t> payload,
                              Rng& rng) {
  auto secret = rng.bytes(kEnvelopeSecretLen);
  HybridCiphertext out;
  out.wrapped_key = pkcs1_encrypt_block(pk, secret, rng).to_bytes_be();
  auto nonce = rng.bytes(out.nonce.size());
  std::copy(nonce.begin(), nonce.end(), out.nonce.begin());

  out.body.resize(payload.size() + 16);
  aes128_ctr_xor(secret.data(), out.nonce.data(), payload, out.body.data());

  std::vector<std::uint8_t> mac_input(out.nonce.begin(), out.nonce.end());
  mac_input.insert(mac_input.end(), out.body.begin(), out.body.end() - 16);
  auto tag = aes128_cmac(secret.data() + 16, mac_input);
  std::copy(tag.begin(), tag.end(), out.body.end() - 16);
  return out;
}

std::vector<std::uint8_t> asym_decrypt(const RsaKeypair& sk, const HybridCiphertext& ct) {
  if (ct.body.size() < 16) fail(Err::DecryptionFailure, "body shorter than tag");
  auto secret = pkcs1_decrypt_block(sk, Bn::from_bytes_be(ct.wrapped_key));
  if (secret.size() != kEnvelopeSecretLen) fail(Err::DecryptionFailure, "wrapped key length mismatch");

  std::vector<std::uint8_t> mac_input(ct.nonce.begin(), ct.nonce.end());
  mac_input.insert(mac_input.end(), ct.body.begin(), ct.body.end() - 16);
  auto tag = aes128_cmac(secret.data() + 16, mac_input);
  if (!std::equal(tag.begin(), tag.end(), ct.body.end() - 16))
    fail(Err::DecryptionFailure, "authentication tag mismatch");

  std::vector<std::uint8_t> plain(ct.body.size() - 16);
  aes128_ctr_xor(secret.data(), ct.nonce.data(), {ct.body.data(), plain.size()}, plain.data());
  return plain;
}

Signature sign(const RsaKeypair& sk, std::span<const std::uint8_t> message) {
  auto digest = sha256(message);
  std::size_t k = modulus_len(sk.pub.n);
  std::size_t t = sizeof(kSha256Prefix) + digest.size();
  if (k < t + 11) fail(Err::ConfigInvalid, "modulus too small for PKCS#1 v1.5 signature");
  std::vector<std::uint8_t> em(k, 0xff);
  em[0] = 0x00;
  em[1] = 0x01;
  em[k - t - 1] = 0x00;
  std::memcpy(em.data() + k - t, kSha256Prefix, sizeof(kSha256Prefix));
  std::memcpy(em.data() + k - digest.size(), digest.data(), digest.size());
  return Signature{mod_exp(Bn::from_bytes_be(em), sk.d, sk.pub.n)};
}

bool verify(const RsaPublicKey& pk, std::span<const std::uint8_t> message, const Signature& sig) {
  if (!(sig.value < pk.n)) return false;
  auto digest = sha256(message);
  std::size_t k = modulus_len(pk.n);
  std::size_t t = sizeof(kSha256Prefix) + digest.size();
  if (k < t + 11) return false;
  std::vector<std::uint8_t> em;
  try {
    em = left_pad(mod_exp(sig.value, pk.e, pk.n), k);
  } catch (const Error&) {
    return false;
  }
  if (em[0] != 0x00 || em[1] != 0x01) return false;
  for (std::size_t i = 2; i < k - t - 1; ++i)
    if (em[i] != 0xff) return false;
  if (em[k - t - 1] != 0x00) return false;
  if (std::memcmp(em.data() + k - t, kSha256Prefix, sizeof(kSha256Prefix)) != 0) return false;
  return std::memcmp(em.data() + k - digest.size(), digest.data(), digest.size()) == 0;
}

PseudoIdentity pid_derive(std::string_view id, const EpochKey& epoch_key) {
  if (id.empty()) fail(Err::EmptyIdentity, "identity must be non-empty");
  if (id.size() > 1024) fail(Err::EmptyIdentity, "identity longer than 1024 bytes");
  PseudoIdentity pid;
  pid.bytes = aes128_cmac(epoch_key.data(),
                          {reinterpret_cast<const std::uint8_t*>(id.data()), id.size()});
  return pid;
}

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";
}

std::string PseudoIdentity::hex() const {
  std::string s;
  s.reserve(32);
  for (auto b : bytes) {
    s.push_back(kHexDigits[b >> 4]);
    s.push_back(kHexDigits[b & 0xf]);
  }
  return s;
}

std::optional<PseudoIdentity> PseudoIdentity::from_hex(std::string_view s) {
  if (s.size() != 32) return std::nullopt;
  PseudoIdentity pid;
  for (std::size_t i = 0; i < 16; ++i) {
    int hi = -1, lo = -1;
    char a = s[2 * i], b = s[2 * i + 1];
    if (a >= '0' && a <= '9') hi = a - '0';
    else if (a >= 'a' && a <= 'f') hi = a - 'a' + 10;
    if (b >= '0' && b <= '9') lo = b - '0';
    else if (b >= 'a' && b <= 'f') lo = b - 'a' + 10;
    if (hi < 0 || lo < 0) return std::nullopt;
    pid.bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return pid;
}

}  // namespace ppls
