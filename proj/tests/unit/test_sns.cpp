#include <doctest.h>

#include <set>

#include "ppls/error.hpp"
#include "ppls/ls.hpp"
#include "ppls/sns.hpp"
#include "ppls/vehicle.hpp"

using namespace ppls;

namespace {

PseudoIdentity random_pid(Rng& rng) {
  PseudoIdentity p;
  auto b = rng.bytes(16);
  std::copy(b.begin(), b.end(), p.bytes.begin());
  return p;
}

/// A social server wired to real stations over an in-process network.
struct Fixture {
  std::shared_ptr<SimClock> clock = std::make_shared<SimClock>();
  std::unique_ptr<Network> net = make_inproc_network();
  Rng rng{123};
  RsaKeypair ls_keys = asym_keygen(512, rng);
  std::vector<std::unique_ptr<LsServer>> stations;
  std::unique_ptr<SnsServer> sns;

  explicit Fixture(std::uint32_t q = 2, std::uint32_t dummy_count = 0) {
    for (std::uint32_t j = 0; j < q; ++j) {
      stations.push_back(
          std::make_unique<LsServer>(LsConfig{j, 200, Bn(1)}, ls_keys, clock, 50 + j));
      net->serve("ls" + std::to_string(j), stations.back()->session_factory());
    }
    SnsConfig cfg;
    cfg.q = q;
    cfg.i_max = 200;
    cfg.t_ms = 10'000;
    cfg.tl_ms = 15'000;
    cfg.dummy_count = dummy_count;
    cfg.paillier_bits = 256;
    sns = std::make_unique<SnsServer>(cfg, ls_keys.pub, *net, clock, 99);
    net->serve("sns", sns->session_factory());
  }

  ~Fixture() {
    sns.reset();
    net->shutdown();
  }

  VehicleClient vehicle(const std::string& id, Coord loc,
                        std::map<std::string, std::uint32_t> friends = {},
                        std::uint32_t ds = 100) {
    return VehicleClient(id, loc, std::move(friends), ds, ls_keys.pub, 512,
                         std::hash<std::string>{}(id));
  }
};

}  // namespace

TEST_CASE("partition keeps every pid exactly once and injects dummies") {
  Rng rng(1);
  std::vector<PseudoIdentity> pids;
  for (int i = 0; i < 10; ++i) pids.push_back(random_pid(rng));

  auto plan = partition_pids(pids, 3, 0, rng);
  REQUIRE(plan.subsets.size() == 3);
  std::multiset<std::string> all;
  for (const auto& s : plan.subsets)
    for (const auto& p : s) all.insert(p.hex());
  std::multiset<std::string> want;
  for (const auto& p : pids) want.insert(p.hex());
  CHECK(all == want);

  // dummies only
  auto dummies = partition_pids({}, 3, 2, rng);
  for (const auto& s : dummies.subsets) {
    CHECK(s.size() == 2);
    for (const auto& d : s) CHECK(want.count(d.hex()) == 0);
  }

  // single station gets everything
  auto single = partition_pids(pids, 1, 0, rng);
  REQUIRE(single.subsets.size() == 1);
  CHECK(single.subsets[0].size() == pids.size());

  CHECK_THROWS_AS(partition_pids(pids, 0, 0, rng), Error);
}

TEST_CASE("registration stores the record and fans out to every station") {
  Fixture f;
  auto alice = f.vehicle("alice", {1500, 1500}, {{"bob", 50}}, 200);
  auto bob = f.vehicle("bob", {1530, 1500}, {{"alice", 50}}, 200);

  auto reply = f.sns->handle_registration(alice.build_registration(0), 0);
  CHECK(std::holds_alternative<wire::Ack>(reply));
  CHECK(f.sns->has_record("alice"));
  for (auto& st : f.stations) CHECK(st->record_count() == 1);

  f.sns->handle_registration(bob.build_registration(0), 0);
  for (auto& st : f.stations) CHECK(st->record_count() == 2);
  CHECK(f.sns->friend_threshold("alice", "bob") == 50);
}

TEST_CASE("stale timestamps and bad signatures reject without state change") {
  Fixture f;
  auto alice = f.vehicle("alice", {1500, 1500});

  auto old_msg = alice.build_registration(0);
  CHECK_THROWS_AS(f.sns->handle_registration(old_msg, 600'001), Error);  // 10 min later
  CHECK_FALSE(f.sns->has_record("alice"));

  auto tampered = alice.build_registration(700'000);
  tampered.ts_ms += 1;  // signature no longer covers ts
  CHECK_THROWS_AS(f.sns->handle_registration(tampered, 700'000), Error);
  CHECK_FALSE(f.sns->has_record("alice"));
  for (auto& st : f.stations) CHECK(st->record_count() == 0);
}

TEST_CASE("thresholds outside [1, i_max] are rejected") {
  Fixture f;
  auto bad_ds = f.vehicle("alice", {1500, 1500}, {}, 201);  // i_max = 200
  CHECK_THROWS_AS(f.sns->handle_registration(bad_ds.build_registration(0), 0), Error);
  auto bad_df = f.vehicle("bob", {1500, 1500}, {{"carol", 0}}, 100);
  CHECK_THROWS_AS(f.sns->handle_registration(bad_df.build_registration(0), 0), Error);
}

TEST_CASE("updates require prior registration and the key on file") {
  Fixture f;
  auto alice = f.vehicle("alice", {1500, 1500});
  CHECK_THROWS_AS(f.sns->handle_update(alice.build_update(0), 0), Error);  // never registered

  auto bob = f.vehicle("bob", {1520, 1500});
  f.sns->handle_registration(bob.build_registration(0), 0);
  auto pid0 = f.sns->current_pid("bob");

  // legitimate update: signed with the key on file, carrying the fresh key
  auto upd = bob.build_update(1000);
  CHECK(std::holds_alternative<wire::Ack>(f.sns->handle_update(upd, 1000)));
  CHECK(f.sns->current_pid("bob") == pid0);  // same epoch, same pid

  // an imposter with its own keys cannot replace bob's record
  auto imposter = f.vehicle("bob", {1999, 1999});
  CHECK_THROWS_AS(f.sns->handle_update(imposter.build_update(2000), 2000), Error);
}

TEST_CASE("update reflects new thresholds") {
  Fixture f;
  auto alice = f.vehicle("alice", {1500, 1500}, {{"bob", 50}}, 200);
  f.sns->handle_registration(alice.build_registration(0), 0);
  CHECK(f.sns->friend_threshold("alice", "bob") == 50);
  alice.set_thresholds({{"bob", 70}}, 150);
  f.sns->handle_update(alice.build_update(1000), 1000);
  CHECK(f.sns->friend_threshold("alice", "bob") == 70);
}

TEST_CASE("epoch advance rotates pids for subsequent enrollments") {
  Fixture f;
  auto alice = f.vehicle("alice", {1500, 1500});
  f.sns->handle_registration(alice.build_registration(0), 0);
  auto pid0 = f.sns->current_pid("alice");

  f.sns->epoch_advance(10'000);
  f.sns->handle_update(alice.build_update(10'000), 10'000);
  auto pid1 = f.sns->current_pid("alice");
  CHECK_FALSE(pid0 == pid1);

  f.sns->epoch_advance(20'000);
  f.sns->handle_update(alice.build_update(20'000), 20'000);
  auto pid2 = f.sns->current_pid("alice");
  CHECK_FALSE(pid1 == pid2);
  CHECK_FALSE(pid0 == pid2);

  auto sets = f.sns->epoch_pid_sets();
  REQUIRE(sets.size() == 3);
  CHECK(sets[0].count(pid0.hex()) == 1);
  CHECK(sets[1].count(pid1.hex()) == 1);
  CHECK(sets[2].count(pid2.hex()) == 1);
}

TEST_CASE("no pid reuse across epochs for a small fleet") {
  Fixture f;
  std::vector<VehicleClient> fleet;
  for (int i = 0; i < 10; ++i)
    fleet.push_back(f.vehicle("vehicle-" + std::to_string(i), {1500, std::uint32_t(1500 + i)}));
  for (auto& v : fleet) f.sns->handle_registration(v.build_registration(0), 0);
  for (int e = 1; e <= 2; ++e) {
    f.sns->epoch_advance(e * 10'000);
    for (auto& v : fleet) f.sns->handle_update(v.build_update(e * 10'000), e * 10'000);
  }
  auto sets = f.sns->epoch_pid_sets();
  REQUIRE(sets.size() == 3);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    CHECK(sets[i].size() == 10);
    for (std::size_t j = i + 1; j < sets.size(); ++j)
      for (const auto& pid : sets[i]) CHECK(sets[j].count(pid) == 0);
  }
}

TEST_CASE("re-registration is authenticated against the key on file") {
  Fixture f;
  auto alice = f.vehicle("alice", {1500, 1500});
  f.sns->handle_registration(alice.build_registration(0), 0);
  auto imposter = f.vehicle("alice", {1999, 1999});
  CHECK_THROWS_AS(f.sns->handle_registration(imposter.build_registration(100), 100), Error);
}
