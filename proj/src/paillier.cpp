#include "ppls/paillier.hpp"

#include "ppls/error.hpp"

namespace ppls::paillier {

namespace {

constexpr int kPrimalityRounds = 40;

Bn random_prime(unsigned bits, Rng& rng) {
  for (;;) {
    Bn cand = rng.bits(bits);
    cand.set_bit(bits - 1);  // keep the product's bit length tight
    cand.set_bit(0);
    Bn p = next_prime(cand);
    if (is_probable_prime(p, kPrimalityRounds)) return p;
  }
}

// L(x) = (x - 1) / n, defined on x = 1 mod n.
Bn ell(const Bn& x, const Bn& n) { return (x - 1u) / n; }

// Completes a keypair once p, q and g are fixed; returns false when the
// generator condition gcd(L(g^lambda mod n^2), n) = 1 fails.
bool finish_keypair(const Bn& p, const Bn& q, const Bn& g, Keypair& out) {
  Bn n = p * q;
  Bn n2 = n * n;
  Bn lam = lcm(p - 1u, q - 1u);
  Bn denom = ell(mod_exp(g, lam, n2), n) % n;
  Bn mu;
  if (!coprime(denom, n) || !mod_inverse(denom, n, mu)) return false;
  out.pub = PublicKey{n, g, n2};
  out.priv = PrivateKey{p, q, lam, mu, n, n2};
  return true;
}

}  // namespace

Keypair keygen(unsigned bits, Rng& rng) {
  if (bits < 64) fail(Err::ConfigInvalid, "paillier key size below 64 bits");
  for (;;) {
    Bn p = random_prime(bits / 2, rng);
    Bn q = random_prime(bits - bits / 2, rng);
    if (p == q) continue;
    Bn n = p * q;
    std::size_t len = n.bit_length();
    if (len + 1 < bits || len > bits + 1) continue;
    Keypair kp;
    if (finish_keypair(p, q, n + 1u, kp)) return kp;
  }
}

Keypair keygen_random_g(unsigned bits, Rng& rng) {
  Keypair base = keygen(bits, rng);
  const Bn& n = base.pub.n;
  const Bn& n2 = base.pub.n2;
  for (;;) {
    Bn g = rng.below(n2);
    if (g.is_zero() || !coprime(g, n2)) continue;
    Keypair kp;
    if (finish_keypair(base.priv.p, base.priv.q, g, kp)) return kp;
  }
}

Keypair keypair_from_primes(const Bn& p, const Bn& q, Rng* g_rng) {
  if (p == q || !is_probable_prime(p, kPrimalityRounds) || !is_probable_prime(q, kPrimalityRounds))
    fail(Err::ConfigInvalid, "p, q must be distinct primes");
  Bn n = p * q;
  if (g_rng == nullptr) {
    Keypair kp;
    if (!finish_keypair(p, q, n + 1u, kp))
      fail(Err::ConfigInvalid, "g = n+1 fails the generator condition for these primes");
    return kp;
  }
  Bn n2 = n * n;
  for (;;) {
    Bn g = g_rng->below(n2);
    if (g.is_zero() || !coprime(g, n2)) continue;
    Keypair kp;
    if (finish_keypair(p, q, g, kp)) return kp;
  }
}

namespace {

Bn g_to_power(const PublicKey& pk, const Bn& m) {
  // g = n+1 makes g^m mod n^2 a single multiplication: 1 + m*n.
  if (pk.g_is_n_plus_1()) return (pk.n * m + 1u) % pk.n2;
  return mod_exp(pk.g, m, pk.n2);
}

void check_plaintext_range(const PublicKey& pk, const Bn& m) {
  if (m < Bn() || !(m < pk.n)) fail(Err::PlaintextOutOfRange, "m must lie in [0, n)");
}

}  // namespace

Ciphertext encrypt(const PublicKey& pk, const Bn& m, Rng& rng) {
  check_plaintext_range(pk, m);
  Bn r = rng.unit_mod(pk.n);
  return Ciphertext{mod_mul(g_to_power(pk, m), mod_exp(r, pk.n, pk.n2), pk.n2)};
}

Ciphertext encrypt_deterministic(const PublicKey& pk, const Bn& m) {
  check_plaintext_range(pk, m);
  return Ciphertext{g_to_power(pk, m)};
}

Bn decrypt(const PrivateKey& sk, const Ciphertext& c) {
  if (!(c.value > Bn()) || !(c.value < sk.n2) || !coprime(c.value, sk.n2))
    fail(Err::MalformedCiphertext, "ciphertext not a unit of Z_{n^2}");
  Bn x = mod_exp(c.value, sk.lambda, sk.n2);
  return mod_mul((x - 1u) / sk.n, sk.mu, sk.n);
}

Ciphertext hom_add(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2) {
  return Ciphertext{mod_mul(c1.value, c2.value, pk.n2)};
}

Ciphertext hom_scale(const PublicKey& pk, const Ciphertext& c, const Bn& k) {
  return Ciphertext{mod_exp(c.value, k, pk.n2)};
}

Bn encode_signed(const PublicKey& pk, std::int64_t v) {
  Bn mag(static_cast<std::uint64_t>(v < 0 ? -v : v));
  if (!(mag + mag < pk.n)) fail(Err::PlaintextOutOfRange, "|v| must be below n/2");
  return v < 0 ? pk.n - mag : mag;
}

}  // namespace ppls::paillier
