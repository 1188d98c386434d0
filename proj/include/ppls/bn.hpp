#pragma once

#include <gmp.h>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ppls {

/// Arbitrary-precision non-negative integer, a thin RAII wrapper over GMP's mpz.
/// All protocol arithmetic (Paillier, RSA, blinding) runs on these values.
class Bn {
 public:
  Bn() { mpz_init(z_); }
  explicit Bn(std::uint64_t v) {
    mpz_init(z_);
    mpz_import(z_, 1, 1, sizeof(v), 0, 0, &v);
  }
  Bn(const Bn& o) { mpz_init_set(z_, o.z_); }
  Bn(Bn&& o) noexcept {
    mpz_init(z_);
    mpz_swap(z_, o.z_);
  }
  Bn& operator=(const Bn& o) {
    if (this != &o) mpz_set(z_, o.z_);
    return *this;
  }
  Bn& operator=(Bn&& o) noexcept {
    mpz_swap(z_, o.z_);
    return *this;
  }
  ~Bn() { mpz_clear(z_); }

  static Bn from_bytes_be(std::span<const std::uint8_t> bytes) {
    Bn r;
    if (!bytes.empty()) mpz_import(r.z_, bytes.size(), 1, 1, 1, 0, bytes.data());
    return r;
  }
  static Bn from_dec(const std::string& s) {
    Bn r;
    mpz_set_str(r.z_, s.c_str(), 10);
    return r;
  }

  /// Minimal big-endian magnitude; empty for zero.
  std::vector<std::uint8_t> to_bytes_be() const {
    if (is_zero()) return {};
    size_t count = (mpz_sizeinbase(z_, 2) + 7) / 8;
    std::vector<std::uint8_t> out(count);
    size_t written = 0;
    mpz_export(out.data(), &written, 1, 1, 1, 0, z_);
    out.resize(written);
    return out;
  }
  std::string to_dec() const {
    char* s = mpz_get_str(nullptr, 10, z_);
    std::string r(s);
    void (*freefn)(void*, size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefn);
    freefn(s, r.size() + 1);
    return r;
  }

  std::size_t bit_length() const { return is_zero() ? 0 : mpz_sizeinbase(z_, 2); }
  bool is_zero() const { return mpz_sgn(z_) == 0; }
  bool is_odd() const { return mpz_odd_p(z_) != 0; }
  bool fits_u64() const { return mpz_sizeinbase(z_, 2) <= 64; }
  std::uint64_t to_u64() const {
    std::uint64_t v = 0;
    mpz_export(&v, nullptr, 1, sizeof(v), 0, 0, z_);
    return v;
  }
  void set_bit(std::size_t i) { mpz_setbit(z_, i); }

  friend bool operator==(const Bn& a, const Bn& b) { return mpz_cmp(a.z_, b.z_) == 0; }
  friend bool operator==(const Bn& a, std::uint64_t b) { return mpz_cmp_ui(a.z_, b) == 0; }
  friend auto operator<=>(const Bn& a, const Bn& b) { return mpz_cmp(a.z_, b.z_) <=> 0; }

  friend Bn operator+(const Bn& a, const Bn& b) {
    Bn r;
    mpz_add(r.z_, a.z_, b.z_);
    return r;
  }
  friend Bn operator+(const Bn& a, std::uint64_t b) {
    Bn r;
    mpz_add_ui(r.z_, a.z_, b);
    return r;
  }
  friend Bn operator-(const Bn& a, const Bn& b) {
    Bn r;
    mpz_sub(r.z_, a.z_, b.z_);
    return r;
  }
  friend Bn operator-(const Bn& a, std::uint64_t b) {
    Bn r;
    mpz_sub_ui(r.z_, a.z_, b);
    return r;
  }
  friend Bn operator*(const Bn& a, const Bn& b) {
    Bn r;
    mpz_mul(r.z_, a.z_, b.z_);
    return r;
  }
  friend Bn operator%(const Bn& a, const Bn& m) {
    Bn r;
    mpz_mod(r.z_, a.z_, m.z_);
    return r;
  }
  friend Bn operator/(const Bn& a, const Bn& b) {
    Bn r;
    mpz_fdiv_q(r.z_, a.z_, b.z_);
    return r;
  }

  mpz_srcptr raw() const { return z_; }
  mpz_ptr raw() { return z_; }

 private:
  mpz_t z_;
};

inline Bn mod_mul(const Bn& a, const Bn& b, const Bn& m) {
  Bn r;
  mpz_mul(r.raw(), a.raw(), b.raw());
  mpz_mod(r.raw(), r.raw(), m.raw());
  return r;
}

inline Bn mod_exp(const Bn& base, const Bn& exp, const Bn& m) {
  Bn r;
  mpz_powm(r.raw(), base.raw(), exp.raw(), m.raw());
  return r;
}

/// Returns false (and leaves out untouched) when no inverse exists.
inline bool mod_inverse(const Bn& a, const Bn& m, Bn& out) {
  return mpz_invert(out.raw(), a.raw(), m.raw()) != 0;
}

inline Bn gcd(const Bn& a, const Bn& b) {
  Bn r;
  mpz_gcd(r.raw(), a.raw(), b.raw());
  return r;
}

inline Bn lcm(const Bn& a, const Bn& b) {
  Bn r;
  mpz_lcm(r.raw(), a.raw(), b.raw());
  return r;
}

inline bool is_probable_prime(const Bn& n, int rounds) {
  return mpz_probab_prime_p(n.raw(), rounds) > 0;
}

inline Bn next_prime(const Bn& n) {
  Bn r;
  mpz_nextprime(r.raw(), n.raw());
  return r;
}

inline bool coprime(const Bn& a, const Bn& b) { return gcd(a, b) == 1; }

}  // namespace ppls
