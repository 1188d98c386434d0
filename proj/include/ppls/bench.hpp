#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ppls {

struct BenchParams {
  std::vector<std::uint32_t> n_values;  // requested-vehicle counts
  std::uint32_t reps = 10;
  unsigned paillier_bits = 1024;
  unsigned rsa_bits = 1024;
  std::uint32_t i_max = 1000;
  std::uint32_t q = 3;
  std::uint64_t seed = 1;
};

struct BenchRow {
  std::uint32_t n = 0;
  double total_ms_mean = 0;
  double total_ms_std = 0;
  double cmp_ms_mean = 0;
  double cmp_ms_std = 0;
  double cmp_share = 0;
};

/// Times one friends-within query against n eligible friends, end to end and
/// the Protocol-1 portion separately; reps repetitions per n. Values of n
/// below 1 are skipped.
std::vector<BenchRow> run_bench(const BenchParams& params, std::ostream* progress = nullptr);

std::string bench_csv(const std::vector<BenchRow>& rows);

/// Coefficient of determination of the least-squares line through
/// (n, total_ms_mean).
double linear_fit_r2(const std::vector<BenchRow>& rows);

}  // namespace ppls
