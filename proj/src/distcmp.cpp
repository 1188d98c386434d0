#include "ppls/distcmp.hpp"

#include "ppls/error.hpp"

namespace ppls::distcmp {

namespace {

void check_params(const paillier::PublicKey& pk, const ComparisonParams& params) {
  if (params.g.is_zero() || !(params.g < pk.n) || !coprime(params.g, pk.n))
    fail(Err::ConfigInvalid, "g must be a unit of Z_n");
  if (params.i_max == 0) fail(Err::ConfigInvalid, "i_max must be positive");
}

/// Fixed-base exponentiation for the per-item randomizers. One batch draws
/// thousands of 128-bit powers of the same base R = rho^n mod n^2; a 4-bit
/// comb table turns each power into at most 31 modular multiplications.
class FixedBasePow {
 public:
  static constexpr unsigned kExpBits = 128;
  static constexpr unsigned kDigits = kExpBits / 4;

  FixedBasePow(const Bn& base, const Bn& modulus) : mod_(modulus) {
    table_[0][0] = Bn(1);
    table_[0][1] = base % modulus;
    for (unsigned d = 2; d < 16; ++d) table_[0][d] = mod_mul(table_[0][d - 1], base, modulus);
    for (unsigned j = 1; j < kDigits; ++j) {
      // table[j][1] = table[j-1][1]^16
      Bn t = table_[j - 1][1];
      for (int k = 0; k < 4; ++k) t = mod_mul(t, t, modulus);
      table_[j][0] = Bn(1);
      table_[j][1] = t;
      for (unsigned d = 2; d < 16; ++d) table_[j][d] = mod_mul(table_[j][d - 1], t, modulus);
    }
  }

  /// base^e mod modulus for e < 2^128.
  Bn pow(const Bn& e) const {
    Bn acc(1);
    mp_limb_t lo = mpz_getlimbn(e.raw(), 0);
    mp_limb_t hi = mpz_getlimbn(e.raw(), 1);
    for (unsigned j = 0; j < kDigits; ++j) {
      unsigned digit = (j < 16) ? unsigned((lo >> (4 * j)) & 0xf) : unsigned((hi >> (4 * (j - 16))) & 0xf);
      if (digit != 0) acc = mod_mul(acc, table_[j][digit], mod_);
    }
    return acc;
  }

 private:
  Bn mod_;
  Bn table_[kDigits][16];
};

}  // namespace

ThresholdCiphertext make_threshold_ct(const paillier::PublicKey& pk_m, std::uint32_t d_threshold,
                                      const ComparisonParams& params, Rng& rng) {
  check_params(pk_m, params);
  if (d_threshold < 1 || d_threshold > params.i_max)
    fail(Err::ThresholdOutOfRange, "threshold must lie in [1, i_max]");
  Bn m = mod_mul(Bn(d_threshold), params.g, pk_m.n);
  return ThresholdCiphertext{paillier::encrypt(pk_m, m, rng)};
}

ComparisonBatch respond(const paillier::PublicKey& pk_m, const ThresholdCiphertext& c,
                        std::uint32_t d_actual, const ComparisonParams& params, Rng& rng) {
  check_params(pk_m, params);
  const Bn& n = pk_m.n;
  const Bn& n2 = pk_m.n2;

  Bn s = rng.unit_mod(n);

  // Pre-blinded first item: (c * PE(-(d_actual + 1) g; 0))^s. Advancing from
  // item i to i+1 multiplies the pre-blinding value by PE(-g; 0); after the
  // exponentiation by s that step becomes one multiplication by
  // PE(-g*s mod n; 0), so the whole batch needs a single full exponentiation.
  Bn minus_first = n - mod_mul(Bn(std::uint64_t(d_actual) + 1), params.g, n);  // -(d_a+1)*g mod n
  if (minus_first == n) minus_first = Bn();                     // reduce n -> 0
  Bn base = paillier::hom_add(pk_m, c.ct, paillier::encrypt_deterministic(pk_m, minus_first)).value;
  Bn u = mod_exp(base, s, n2);
  Bn step = paillier::encrypt_deterministic(pk_m, n - mod_mul(params.g, s, n)).value;

  // Per-item re-randomization: item i is masked with R^{e_i} where
  // R = rho^n mod n^2 encrypts zero and e_i is a fresh 128-bit exponent.
  Bn rho = rng.unit_mod(n);
  FixedBasePow well(mod_exp(rho, n, n2), n2);

  ComparisonBatch batch;
  batch.items.reserve(params.i_max);
  for (std::uint32_t i = 1; i <= params.i_max; ++i) {
    Bn e = rng.bits(FixedBasePow::kExpBits);
    if (e.is_zero()) e = Bn(1);
    batch.items.push_back(paillier::Ciphertext{mod_mul(u, well.pow(e), n2)});
    if (i < params.i_max) u = mod_mul(u, step, n2);
  }
  return batch;
}

bool judge(const paillier::PrivateKey& sk_m, const ComparisonBatch& batch) {
  for (const auto& item : batch.items) {
    if (paillier::decrypt(sk_m, item).is_zero()) return true;
  }
  return false;
}

}  // namespace ppls::distcmp
