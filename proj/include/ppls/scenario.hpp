#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ppls/coord.hpp"
#include "ppls/sns.hpp"
#include "ppls/wire.hpp"

namespace ppls {

struct FleetVehicle {
  std::string id;
  Coord loc;
  std::uint32_t ds = 100;
  std::map<std::string, std::uint32_t> friends;  // friend id -> df (my threshold for them)
};

struct ScenarioEvent {
  enum class Op { Register, Update, Move, EpochAdvance, Purge, Query };

  std::int64_t at_ms = 0;
  Op op = Op::Register;
  std::string id;                    // vehicle id or "all"; query requester
  Coord to{};                        // Move
  wire::QueryType qtype = wire::QueryType::ParticularFriends;
  std::vector<std::string> targets;  // pf query
  std::uint32_t l = 0;               // f / s query
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::uint32_t q = 1;
  std::uint32_t i_max = 1000;
  unsigned paillier_bits = 512;
  unsigned rsa_bits = 512;
  std::int64_t t_ms = 10'000;
  std::int64_t tl_ms = 15'000;
  std::uint32_t dummy_count = 0;
  std::string backend = "inproc";  // or "socket"
  std::vector<FleetVehicle> fleet;
  std::vector<ScenarioEvent> events;

  void validate() const;  // ConfigInvalid with element-level diagnostics
  static ScenarioConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

struct ReturnedItem {
  std::string label;
  Coord loc;
};

struct QueryResult {
  std::int64_t at_ms = 0;
  std::string requester;
  wire::QueryType qtype = wire::QueryType::ParticularFriends;
  std::vector<std::string> targets;
  std::uint32_t l = 0;
  std::string error;  // wire error, when the query failed
  std::vector<ReturnedItem> items;
  std::vector<std::string> returned_ids;
  std::vector<ComparedPair> compared;
  bool oracle_ok = false;
  std::string oracle_detail;
  double total_ms = 0;
  double cmp_ms = 0;
};

struct AuditResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ScenarioReport {
  std::vector<QueryResult> queries;
  std::vector<AuditResult> audits;
  std::uint64_t epochs = 0;
  std::size_t messages = 0;
  std::vector<std::string> event_errors;

  bool passed() const;
  std::string to_json_text(bool include_timings) const;
};

ScenarioReport run_scenario(const ScenarioConfig& cfg);

/// The demo fixture: alice and bob are friends 30 m apart, carol is a
/// stranger 80 m away, with queries before and after an epoch boundary.
ScenarioConfig three_vehicle_fixture();

/// Seeded random fleet of n vehicles querying across three epochs.
ScenarioConfig random_scenario(std::uint64_t seed, std::size_t n_vehicles);

}  // namespace ppls
