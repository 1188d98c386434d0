#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "ppls/asym.hpp"
#include "ppls/distcmp.hpp"
#include "ppls/ls.hpp"
#include "ppls/rng.hpp"
#include "ppls/transport.hpp"
#include "ppls/wire.hpp"

namespace ppls {

struct SnsConfig {
  std::uint32_t q = 1;             // number of location servers
  std::uint32_t i_max = 1000;
  std::int64_t t_ms = 10'000;      // update cycle
  std::int64_t tl_ms = 15'000;     // LS record lifetime, must satisfy t < tl <= 2t
  std::uint32_t dummy_count = 0;   // dummies injected per dispatched subset
  unsigned paillier_bits = 512;    // per-query judging keys
  std::int64_t clock_skew_ms = 60'000;
  Bn cmp_g{1};
};

/// Identity-side state for one vehicle. Location and key ciphertexts pass
/// through opaquely; this module never holds a plaintext coordinate.
struct SnsVehicleRecord {
  std::string id;
  RsaPublicKey pk_on_file;
  std::set<std::string> friend_list;
  std::map<std::string, std::uint32_t> friend_thresholds;  // friend id -> df
  std::uint32_t stranger_threshold = 0;
  PseudoIdentity current_pid;
  HybridCiphertext enc_loc_passthrough;
  HybridCiphertext enc_pk_passthrough;
};

/// Result of randomly splitting a PID set across stations, dummies included.
struct PartitionPlan {
  std::vector<std::vector<PseudoIdentity>> subsets;  // one per station, may be empty
  std::uint32_t dummy_count = 0;
};

PartitionPlan partition_pids(const std::vector<PseudoIdentity>& pids, std::uint32_t q,
                             std::uint32_t dummy_count, Rng& rng);

/// One Protocol-1 outcome, recorded for the god-view verdict audit.
struct ComparedPair {
  std::string requester;
  std::string target;
  std::uint32_t threshold = 0;
  bool verdict = false;
};

/// Per-query bookkeeping the harness drains after each reply.
struct QueryAccount {
  std::string requester;
  wire::QueryType qtype = wire::QueryType::ParticularFriends;
  std::vector<ComparedPair> compared;
  std::vector<std::string> returned_ids;
  std::vector<std::string> dispatched_real_pids;  // hex, across all subsets
  std::vector<std::string> target_pids;           // hex, the real set before partitioning
};

class SnsServer {
 public:
  SnsServer(SnsConfig cfg, RsaPublicKey ls_pk, Network& net, std::shared_ptr<SimClock> clock,
            std::uint64_t seed);

  SessionFactory session_factory();

  // Role operations (also driven directly by unit tests).
  wire::Message handle_registration(const wire::Registration& msg, std::int64_t now);
  wire::Message handle_update(const wire::Update& msg, std::int64_t now);
  std::uint64_t epoch_advance(std::int64_t now);
  wire::Message handle_query_pf(const wire::QueryParticularFriends& msg, std::int64_t now);
  wire::Message handle_query_f(const wire::QueryFriendsWithin& msg, std::int64_t now);
  wire::Message handle_query_s(const wire::QueryStrangersWithin& msg, std::int64_t now);

  std::uint64_t epoch_index() const { return epoch_index_; }
  bool has_record(const std::string& id) const;
  PseudoIdentity current_pid(const std::string& id) const;
  std::uint32_t friend_threshold(const std::string& owner, const std::string& of) const;

  /// PID sets per epoch, for the rotation audit.
  std::vector<std::set<std::string>> epoch_pid_sets() const;
  std::vector<QueryAccount> drain_accounts();

  std::int64_t cmp_us() const { return cmp_us_.load(); }
  void reset_stats() { cmp_us_.store(0); }

 private:
  struct TargetEntry {
    std::string id;
    PseudoIdentity pid;
    std::uint32_t threshold = 0;
  };

  void validate_enrollment(const wire::Enrollment& msg, const RsaPublicKey& verify_key,
                           std::int64_t now) const;
  void upsert_record(const wire::Enrollment& msg);
  void fan_out_store(const SnsVehicleRecord& rec);
  wire::ReplyToVehicle orchestrate(const SnsVehicleRecord& requester,
                                   const HybridCiphertext& enc_loc, wire::QueryType qtype,
                                   const std::vector<TargetEntry>& targets,
                                   std::optional<std::uint32_t> l, QueryAccount& account);

  SnsConfig cfg_;
  RsaPublicKey ls_pk_;
  Network& net_;
  std::shared_ptr<SimClock> clock_;

  mutable std::mutex mu_;
  std::map<std::string, SnsVehicleRecord> records_;
  std::map<std::string, std::string> pid_to_id_;          // all epochs
  std::vector<std::set<std::string>> epoch_pids_;         // hex per epoch
  EpochKey epoch_key_{};
  std::uint64_t epoch_index_ = 0;
  std::vector<std::unique_ptr<Channel>> control_;         // persistent store fan-out channels
  Rng rng_;
  std::vector<QueryAccount> accounts_;
  std::atomic<std::int64_t> cmp_us_{0};
};

}  // namespace ppls
