#pragma once

#include <cstdint>

#include "ppls/bn.hpp"
#include "ppls/rng.hpp"

namespace ppls::paillier {

struct PublicKey {
  Bn n;        // modulus, product of two primes
  Bn g;        // generator of the plaintext encoding, n+1 in the default scheme
  Bn n2;       // cached n^2

  bool g_is_n_plus_1() const { return g == n + 1; }
};

struct PrivateKey {
  Bn p;
  Bn q;
  Bn lambda;   // lcm(p-1, q-1)
  Bn mu;       // L(g^lambda mod n^2)^{-1} mod n, the precomputed decryption denominator
  Bn n;
  Bn n2;
};

struct Keypair {
  PublicKey pub;
  PrivateKey priv;
};

struct Ciphertext {
  Bn value;    // element of [1, n^2) coprime to n^2

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

/// Fresh keypair with g = n+1. Retries internally until all key invariants
/// hold; bits >= 64.
Keypair keygen(unsigned bits, Rng& rng);

/// Conformance path: g drawn at random from Z*_{n^2} subject to the
/// gcd(L(g^lambda mod n^2), n) = 1 condition.
Keypair keygen_random_g(unsigned bits, Rng& rng);

/// Test hook: build a keypair from fixed primes (e.g. p=11, q=13) so unit
/// tests can check against hand-computed values. Pass rng to sample a random
/// g, otherwise g = n+1.
Keypair keypair_from_primes(const Bn& p, const Bn& q, Rng* g_rng = nullptr);

Ciphertext encrypt(const PublicKey& pk, const Bn& m, Rng& rng);

/// Zero-randomness encoding g^m mod n^2; composes homomorphically with
/// randomized ciphertexts and is deterministic per (pk, m).
Ciphertext encrypt_deterministic(const PublicKey& pk, const Bn& m);

Bn decrypt(const PrivateKey& sk, const Ciphertext& c);

Ciphertext hom_add(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2);

/// decrypt(hom_scale(E(m), k)) = m*k mod n; k = 0 yields an encryption of 0.
Ciphertext hom_scale(const PublicKey& pk, const Ciphertext& c, const Bn& k);

/// Half-range signed encoding: v >= 0 maps to v, v < 0 maps to n+v.
/// Requires |v| < n/2.
Bn encode_signed(const PublicKey& pk, std::int64_t v);

}  // namespace ppls::paillier
