#pragma once

#include <cstdint>
#include <vector>

#include "ppls/paillier.hpp"
#include "ppls/rng.hpp"

namespace ppls::distcmp {

/// Parameters shared by both sides of the comparison. g is the plaintext-space
/// constant multiplying every distance (any unit works, 1 by default); i_max
/// bounds the responder's traversal and therefore the largest representable
/// threshold.
struct ComparisonParams {
  Bn g{1};
  std::uint32_t i_max = 1000;
};

/// Randomized encryption of d_threshold * g under the judge's key.
struct ThresholdCiphertext {
  paillier::Ciphertext ct;
};

/// i_max blinded ciphertexts; the item at position i-1 decrypts to
/// s * (d_threshold - (d_actual + i)) * g mod n, so exactly one item decrypts
/// to zero iff 1 <= d_threshold - d_actual <= i_max.
struct ComparisonBatch {
  std::vector<paillier::Ciphertext> items;
};

ThresholdCiphertext make_threshold_ct(const paillier::PublicKey& pk_m, std::uint32_t d_threshold,
                                      const ComparisonParams& params, Rng& rng);

/// Responder side: never learns d_threshold, blinds every difference with a
/// fresh unit s and per-item randomizers.
ComparisonBatch respond(const paillier::PublicKey& pk_m, const ThresholdCiphertext& c,
                        std::uint32_t d_actual, const ComparisonParams& params, Rng& rng);

/// Judge side: true iff some item decrypts to zero, i.e. d_threshold > d_actual.
bool judge(const paillier::PrivateKey& sk_m, const ComparisonBatch& batch);

/// Plaintext reference for property tests.
constexpr bool oracle_compare(std::uint64_t d_threshold, std::uint64_t d_actual) {
  return d_threshold > d_actual;
}

}  // namespace ppls::distcmp
