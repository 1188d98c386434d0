#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ppls/asym.hpp"
#include "ppls/coord.hpp"
#include "ppls/distcmp.hpp"
#include "ppls/rng.hpp"
#include "ppls/transport.hpp"
#include "ppls/wire.hpp"

namespace ppls {

/// Simulation clock shared by every role; advanced by the scenario driver.
class SimClock {
 public:
  std::int64_t now_ms() const { return now_ms_.load(); }
  void set_ms(std::int64_t t) { now_ms_.store(t); }

 private:
  std::atomic<std::int64_t> now_ms_{0};
};

struct LsConfig {
  std::uint32_t station_index = 0;
  std::uint32_t i_max = 1000;
  Bn cmp_g{1};
};

/// Pseudonymous location record; identities never reach this module.
struct LsRecord {
  PseudoIdentity pid;
  Coord loc;
  RsaPublicKey requester_pk;  // decrypted C_pk_s(pk_u): key results get encrypted under
  std::int64_t expires_at = 0;
};

class LsServer {
 public:
  LsServer(LsConfig cfg, RsaKeypair keypair, std::shared_ptr<SimClock> clock,
           std::uint64_t seed);

  SessionFactory session_factory();

  // Role operations, exposed for unit tests; the session handler routes wire
  // messages onto these.
  void store_record(const wire::StoreRecord& msg, std::int64_t now);
  std::size_t purge_expired(std::int64_t now);
  std::vector<PseudoIdentity> range_query(const PseudoIdentity& requester, std::uint32_t l,
                                          std::int64_t now);
  HybridCiphertext encrypt_result(const PseudoIdentity& target, const RsaPublicKey& requester_pk,
                                  std::int64_t now);

  const RsaPublicKey& public_key() const { return keypair_.pub; }

  /// Serialized view of the whole store for the identity-blindness audit.
  std::string state_dump() const;

  std::size_t record_count() const;
  std::int64_t respond_us() const { return respond_us_.load(); }
  void reset_stats() { respond_us_.store(0); }

 private:
  struct Session;

  bool lookup(const PseudoIdentity& pid, std::int64_t now, LsRecord& out) const;
  wire::Message handle(Session& session, const wire::Message& msg);

  LsConfig cfg_;
  RsaKeypair keypair_;
  std::shared_ptr<SimClock> clock_;
  mutable std::mutex mu_;
  std::map<std::string, LsRecord> store_;  // keyed by pid hex
  Rng rng_;
  std::mutex rng_mu_;
  std::atomic<std::int64_t> respond_us_{0};
};

}  // namespace ppls
