#include <doctest.h>

#include <cstring>
#include <set>

#include "ppls/asym.hpp"
#include "ppls/error.hpp"

using namespace ppls;

namespace {

std::uint64_t modpow_u64(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t acc = 1 % m;
  b %= m;
  while (e > 0) {
    if (e & 1) acc = acc * b % m;
    b = b * b % m;
    e >>= 1;
  }
  return acc;
}

std::vector<std::uint8_t> bytes_of(const char* s) {
  return {reinterpret_cast<const std::uint8_t*>(s),
          reinterpret_cast<const std::uint8_t*>(s) + std::strlen(s)};
}

}  // namespace

TEST_CASE("forced primes 61/53 with e=17 give d=2753") {
  auto kp = rsa_keypair_from(Bn(61), Bn(53), Bn(17));
  CHECK(kp.pub.n == 3233);
  CHECK(kp.d == 2753);
  // independent check: 17 * 2753 = 1 mod (60 * 52)
  CHECK(17ull * 2753ull % 3120ull == 1);
}

TEST_CASE("raw block path matches independent modular exponentiation") {
  auto kp = rsa_keypair_from(Bn(61), Bn(53), Bn(17));
  std::uint64_t c_oracle = modpow_u64(65, 17, 3233);
  CHECK(c_oracle == 2790);
  CHECK(rsa_encrypt_raw(kp.pub, Bn(65)) == c_oracle);
  CHECK(rsa_decrypt_raw(kp, Bn(c_oracle)) == 65);
}

TEST_CASE("keygen size contract and seed separation") {
  Rng a(1), b(2);
  auto ka = asym_keygen(512, a);
  std::size_t len = ka.pub.n.bit_length();
  CHECK(len >= 511);
  CHECK(len <= 513);
  auto kb = asym_keygen(512, b);
  CHECK_FALSE(ka.pub.n == kb.pub.n);
}

TEST_CASE("hybrid envelope round-trips across payload sizes") {
  Rng rng(3);
  auto kp = asym_keygen(512, rng);
  for (std::size_t len : {std::size_t(0), std::size_t(1), std::size_t(16), std::size_t(1000),
                          std::size_t(100'000)}) {
    auto payload = rng.bytes(len);
    auto ct = asym_encrypt(kp.pub, payload, rng);
    CHECK(asym_decrypt(kp, ct) == payload);
  }
}

TEST_CASE("hybrid decrypt failures") {
  Rng rng(4);
  auto kp = asym_keygen(512, rng);
  auto other = asym_keygen(512, rng);
  auto ct = asym_encrypt(kp.pub, bytes_of("sixteen byte msg"), rng);

  CHECK_THROWS_AS(asym_decrypt(other, ct), Error);  // wrong key

  auto corrupted = ct;
  corrupted.body[0] ^= 0x01;
  CHECK_THROWS_AS(asym_decrypt(kp, corrupted), Error);

  auto truncated = ct;
  truncated.body.resize(8);
  CHECK_THROWS_AS(asym_decrypt(kp, truncated), Error);
}

TEST_CASE("signatures verify and reject perturbations") {
  Rng rng(5);
  auto kp = asym_keygen(512, rng);
  auto msg = bytes_of("alice|1723280000000");
  auto sig = sign(kp, msg);
  CHECK(verify(kp.pub, msg, sig));

  auto flipped = msg;
  flipped[3] ^= 0x20;
  CHECK_FALSE(verify(kp.pub, flipped, sig));

  auto bad_sig = sig;
  bad_sig.value = bad_sig.value + 1u;
  CHECK_FALSE(verify(kp.pub, msg, bad_sig));

  auto other = asym_keygen(512, rng);
  CHECK_FALSE(verify(other.pub, msg, sig));
}

TEST_CASE("public key payload round-trips") {
  Rng rng(6);
  auto kp = asym_keygen(512, rng);
  auto back = rsa_pub_from_bytes(rsa_pub_to_bytes(kp.pub));
  CHECK(back == kp.pub);
}

TEST_CASE("pid derivation is a per-epoch PRF") {
  EpochKey k1{}, k2{};
  k1[0] = 1;
  k2[0] = 2;
  CHECK(pid_derive("alice", k1) == pid_derive("alice", k1));
  CHECK_FALSE(pid_derive("alice", k1) == pid_derive("alice", k2));
  CHECK_FALSE(pid_derive("alice", k1) == pid_derive("bob", k1));

  // same id under 100 distinct keys: all distinct
  Rng rng(7);
  std::set<std::string> pids;
  for (int i = 0; i < 100; ++i) {
    EpochKey k = rng.key128();
    pids.insert(pid_derive("alice", k).hex());
  }
  CHECK(pids.size() == 100);

  // 1000 distinct ids under one key: no collision at this scale
  std::set<std::string> fleet;
  for (int i = 0; i < 1000; ++i) fleet.insert(pid_derive("vehicle-" + std::to_string(i), k1).hex());
  CHECK(fleet.size() == 1000);

  CHECK_THROWS_AS(pid_derive("", k1), Error);
}

TEST_CASE("pid hex round-trip") {
  EpochKey k{};
  k[5] = 77;
  auto pid = pid_derive("carol", k);
  auto parsed = PseudoIdentity::from_hex(pid.hex());
  REQUIRE(parsed.has_value());
  CHECK(*parsed == pid);
  CHECK_FALSE(PseudoIdentity::from_hex("xyz").has_value());
  CHECK_FALSE(PseudoIdentity::from_hex("00").has_value());
}
