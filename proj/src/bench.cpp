#include "ppls/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <ostream>

#include "ppls/error.hpp"
#include "ppls/ls.hpp"
#include "ppls/sns.hpp"
#include "ppls/transport.hpp"
#include "ppls/vehicle.hpp"

namespace ppls {

namespace {

using steady = std::chrono::steady_clock;

struct Stats {
  double mean = 0;
  double stddev = 0;
};

Stats sample_stats(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= double(xs.size());
  if (xs.size() > 1) {
    double acc = 0;
    for (double x : xs) acc += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(acc / double(xs.size() - 1));
  }
  return s;
}

/// One fleet: a requester plus n friends, every friend eligible (distance
/// strictly below its threshold for the requester) and no radius pre-filter.
BenchRow bench_one(std::uint32_t n, const BenchParams& params) {
  auto clock = std::make_shared<SimClock>();
  auto net = make_inproc_network();  // computation benchmark: no socket, no log

  Rng rng(Rng::derive_seed(params.seed, "bench-" + std::to_string(n)));
  RsaKeypair ls_keys = asym_keygen(params.rsa_bits, rng);

  std::vector<std::unique_ptr<LsServer>> stations;
  for (std::uint32_t j = 0; j < params.q; ++j) {
    stations.push_back(std::make_unique<LsServer>(LsConfig{j, params.i_max, Bn(1)}, ls_keys, clock,
                                                  rng.u64()));
    net->serve("ls" + std::to_string(j), stations.back()->session_factory());
  }

  SnsConfig sns_cfg;
  sns_cfg.q = params.q;
  sns_cfg.i_max = params.i_max;
  sns_cfg.t_ms = 1'000'000'000;
  sns_cfg.tl_ms = 1'500'000'000;
  sns_cfg.dummy_count = 0;
  sns_cfg.paillier_bits = params.paillier_bits;
  auto sns = std::make_unique<SnsServer>(sns_cfg, ls_keys.pub, *net, clock, rng.u64());
  net->serve("sns", sns->session_factory());

  const Coord base{5000, 5000};
  std::map<std::string, std::uint32_t> requester_friends;
  std::vector<std::unique_ptr<VehicleClient>> fleet;
  std::vector<std::pair<std::string, Coord>> friend_specs;
  for (std::uint32_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "fr-%03u", i);
    std::uint32_t df = (1 + rng.u32_below(10)) * 10;       // 10..100, paper's friend range
    std::uint32_t d = 1 + rng.u32_below(df - 1 ? df - 1 : 1);  // eligible: d < df
    requester_friends[buf] = 100;
    friend_specs.emplace_back(buf, Coord{base.x + d, base.y});
    fleet.push_back(std::make_unique<VehicleClient>(
        buf, Coord{base.x + d, base.y}, std::map<std::string, std::uint32_t>{{"req", df}}, 1000,
        ls_keys.pub, params.rsa_bits, rng.u64()));
  }
  auto requester = std::make_unique<VehicleClient>("req", base, requester_friends, 1000,
                                                   ls_keys.pub, params.rsa_bits, rng.u64());

  clock->set_ms(0);
  {
    auto ch = net->connect("vehicle:req", "sns");
    auto reply = ch->request(requester->build_registration(0));
    if (!std::holds_alternative<wire::Ack>(reply)) fail(Err::Internal, "bench registration failed");
    for (auto& v : fleet) {
      reply = ch->request(v->build_registration(0));
      if (!std::holds_alternative<wire::Ack>(reply)) fail(Err::Internal, "bench registration failed");
    }
    ch->close();
  }

  std::vector<double> totals, cmps;
  for (std::uint32_t rep = 0; rep < params.reps; ++rep) {
    clock->set_ms(1000 + rep);
    sns->reset_stats();
    for (auto& st : stations) st->reset_stats();

    auto ch = net->connect("vehicle:req", "sns");
    auto t0 = steady::now();
    auto reply = ch->request(requester->query_friends_within(100'000));
    auto* rep_msg = std::get_if<wire::ReplyToVehicle>(&reply);
    if (rep_msg == nullptr) fail(Err::Internal, "bench query failed");
    auto items = requester->decrypt_response(*rep_msg);
    double total = std::chrono::duration<double, std::milli>(steady::now() - t0).count();
    ch->close();
    if (items.size() != n) fail(Err::Internal, "bench query returned wrong count");

    std::int64_t cmp_us = sns->cmp_us();
    for (auto& st : stations) cmp_us += st->respond_us();
    totals.push_back(total);
    cmps.push_back(double(cmp_us) / 1000.0);
  }

  sns.reset();
  net->shutdown();

  auto ts = sample_stats(totals);
  auto cs = sample_stats(cmps);
  BenchRow row{n, ts.mean, ts.stddev, cs.mean, cs.stddev,
               ts.mean > 0 ? cs.mean / ts.mean : 0};
  return row;
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchParams& params, std::ostream* progress) {
  std::vector<BenchRow> rows;
  for (auto n : params.n_values) {
    if (n < 1) continue;  // zero-row guard
    auto row = bench_one(n, params);
    if (progress) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "n=%3u  total=%.1f ms (sd %.1f)  cmp=%.1f ms (sd %.1f)  share=%.3f",
                    row.n, row.total_ms_mean, row.total_ms_std, row.cmp_ms_mean, row.cmp_ms_std,
                    row.cmp_share);
      (*progress) << buf << std::endl;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "n,total_ms_mean,total_ms_std,cmp_ms_mean,cmp_ms_std,cmp_share\n";
  char buf[200];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%u,%.3f,%.3f,%.3f,%.3f,%.4f\n", r.n, r.total_ms_mean,
                  r.total_ms_std, r.cmp_ms_mean, r.cmp_ms_std, r.cmp_share);
    out += buf;
  }
  return out;
}

double linear_fit_r2(const std::vector<BenchRow>& rows) {
  if (rows.size() < 2) return 1.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double m = double(rows.size());
  for (const auto& r : rows) {
    sx += r.n;
    sy += r.total_ms_mean;
    sxx += double(r.n) * r.n;
    sxy += double(r.n) * r.total_ms_mean;
  }
  double denom = m * sxx - sx * sx;
  if (denom == 0) return 1.0;
  double slope = (m * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / m;
  double ss_res = 0, ss_tot = 0, mean_y = sy / m;
  for (const auto& r : rows) {
    double fit = slope * r.n + intercept;
    ss_res += (r.total_ms_mean - fit) * (r.total_ms_mean - fit);
    ss_tot += (r.total_ms_mean - mean_y) * (r.total_ms_mean - mean_y);
  }
  if (ss_tot == 0) return 1.0;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace ppls
