#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "ppls/bn.hpp"

namespace ppls {

/// Deterministic randomness source (GMP Mersenne Twister). Every protocol
/// participant owns its own Rng seeded from the scenario master seed, so runs
/// are reproducible and no state is shared across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : s_(std::make_unique<State>()) {
    gmp_randinit_mt(st_());
    gmp_randseed_ui(st_(), seed);
  }
  explicit Rng(std::span<const std::uint8_t> seed) : s_(std::make_unique<State>()) {
    gmp_randinit_mt(st_());
    Bn s = Bn::from_bytes_be(seed);
    gmp_randseed(st_(), s.raw());
  }
  Rng(const Rng&) = delete;
  Rng& operator=(const Rng&) = delete;
  Rng(Rng&&) noexcept = default;
  Rng& operator=(Rng&&) noexcept = default;
  ~Rng() {
    if (s_) gmp_randclear(st_());
  }

  /// Stable sub-seed for a named participant under a master seed.
  static std::array<std::uint8_t, 32> derive_seed(std::uint64_t master, std::string_view label);

  /// Uniform in [0, 2^k).
  Bn bits(unsigned k) {
    Bn r;
    mpz_urandomb(r.raw(), st_(), k);
    return r;
  }
  /// Uniform in [0, bound).
  Bn below(const Bn& bound) {
    Bn r;
    mpz_urandomm(r.raw(), st_(), bound.raw());
    return r;
  }
  /// Uniform unit of Z_n, i.e. in [1, n) with gcd(r, n) = 1.
  Bn unit_mod(const Bn& n) {
    for (;;) {
      Bn r = below(n);
      if (!r.is_zero() && coprime(r, n)) return r;
    }
  }
  std::uint64_t u64() { return bits(64).to_u64(); }
  std::uint32_t u32_below(std::uint32_t bound) {
    return bound == 0 ? 0 : static_cast<std::uint32_t>(below(Bn(bound)).to_u64());
  }

  std::vector<std::uint8_t> bytes(std::size_t k) {
    std::vector<std::uint8_t> out(k, 0);
    Bn v = bits(static_cast<unsigned>(8 * k));
    auto be = v.to_bytes_be();
    std::copy(be.begin(), be.end(), out.begin() + (k - be.size()));
    return out;
  }
  std::array<std::uint8_t, 16> key128() {
    auto v = bytes(16);
    std::array<std::uint8_t, 16> k{};
    std::copy(v.begin(), v.end(), k.begin());
    return k;
  }

  /// Fisher–Yates using this stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = u32_below(static_cast<std::uint32_t>(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  struct State {
    gmp_randstate_t st;
  };

  gmp_randstate_t& st_() { return s_->st; }

  std::unique_ptr<State> s_;
};

}  // namespace ppls
