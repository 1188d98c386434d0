#include "ppls/ls.hpp"

#include <chrono>
#include <sstream>

#include "ppls/error.hpp"

namespace ppls {

namespace {

using steady = std::chrono::steady_clock;

std::int64_t us_since(steady::time_point t0) {
  return std::chrono::duration_cast<std::chrono::microseconds>(steady::now() - t0).count();
}

}  // namespace

LsServer::LsServer(LsConfig cfg, RsaKeypair keypair, std::shared_ptr<SimClock> clock,
                   std::uint64_t seed)
    : cfg_(cfg), keypair_(std::move(keypair)), clock_(std::move(clock)), rng_(seed) {}

bool LsServer::lookup(const PseudoIdentity& pid, std::int64_t now, LsRecord& out) const {
  std::lock_guard lk(mu_);
  auto it = store_.find(pid.hex());
  if (it == store_.end() || it->second.expires_at <= now) return false;
  out = it->second;
  return true;
}

void LsServer::store_record(const wire::StoreRecord& msg, std::int64_t now) {
  Coord loc;
  RsaPublicKey pk;
  try {
    loc = parse_coord(asym_decrypt(keypair_, msg.enc_loc));
    pk = rsa_pub_from_bytes(asym_decrypt(keypair_, msg.enc_pk));
  } catch (const Error&) {
    fail(Err::DecryptionFailure, "store record rejected");
  }
  if (loc.x >= kCoordLimit || loc.y >= kCoordLimit)
    fail(Err::DecryptionFailure, "coordinates out of range");

  std::lock_guard lk(mu_);
  store_[msg.pid.hex()] = LsRecord{msg.pid, loc, std::move(pk), now + msg.tl_ms};
}

std::size_t LsServer::purge_expired(std::int64_t now) {
  std::lock_guard lk(mu_);
  std::size_t removed = 0;
  for (auto it = store_.begin(); it != store_.end();) {
    if (it->second.expires_at <= now) {
      it = store_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

std::vector<PseudoIdentity> LsServer::range_query(const PseudoIdentity& requester, std::uint32_t l,
                                                  std::int64_t now) {
  LsRecord self;
  if (!lookup(requester, now, self)) fail(Err::UnknownRequester, "requester unknown to this station");
  std::vector<PseudoIdentity> hits;
  {
    std::lock_guard lk(mu_);
    for (const auto& [hex, rec] : store_) {
      if (hex == requester.hex() || rec.expires_at <= now) continue;
      if (distance(self.loc, rec.loc) < l) hits.push_back(rec.pid);
    }
  }
  std::lock_guard rlk(rng_mu_);
  rng_.shuffle(hits);
  return hits;
}

HybridCiphertext LsServer::encrypt_result(const PseudoIdentity& target,
                                          const RsaPublicKey& requester_pk, std::int64_t now) {
  LsRecord rec;
  if (!lookup(target, now, rec)) fail(Err::UnknownTarget, "target unknown to this station");
  auto payload = coord_bytes(rec.loc);
  std::lock_guard rlk(rng_mu_);
  return asym_encrypt(requester_pk, payload, rng_);
}

std::string LsServer::state_dump() const {
  std::lock_guard lk(mu_);
  std::ostringstream os;
  os << "ls" << cfg_.station_index << " records=" << store_.size() << "\n";
  for (const auto& [hex, rec] : store_) {
    os << hex << " x=" << rec.loc.x << " y=" << rec.loc.y << " exp=" << rec.expires_at
       << " pk_n=" << rec.requester_pk.n.to_dec() << " pk_e=" << rec.requester_pk.e.to_dec() << "\n";
  }
  return os.str();
}

std::size_t LsServer::record_count() const {
  std::lock_guard lk(mu_);
  return store_.size();
}

/// Per-connection state: a verdict message refers to the dispatch that
/// immediately preceded it on the same connection.
struct LsServer::Session {
  bool pending = false;
  RsaPublicKey requester_pk;
  std::map<std::string, Coord> candidates;  // pid hex -> location at dispatch time
};

wire::Message LsServer::handle(Session& session, const wire::Message& msg) {
  std::int64_t now = clock_->now_ms();
  if (const auto* store = std::get_if<wire::StoreRecord>(&msg)) {
    store_record(*store, now);
    return wire::Ack{};
  }
  if (const auto* range = std::get_if<wire::RangePreQuery>(&msg)) {
    return wire::RangePreResult{range_query(range->requester, range->l, now)};
  }
  if (const auto* dispatch = std::get_if<wire::SubsetDispatch>(&msg)) {
    if (dispatch->threshold_cts.size() != dispatch->subset.size())
      fail(Err::MalformedFrame, "threshold count does not match subset");
    LsRecord self;
    if (!lookup(dispatch->requester, now, self))
      fail(Err::UnknownRequester, "requester unknown to this station");
    Coord req_loc = parse_coord(asym_decrypt(keypair_, dispatch->enc_loc));

    distcmp::ComparisonParams params{cfg_.cmp_g, cfg_.i_max};
    session.pending = true;
    session.requester_pk = self.requester_pk;
    session.candidates.clear();

    wire::ComparisonBatchMsg reply;
    reply.entries.reserve(dispatch->subset.size());
    for (std::size_t k = 0; k < dispatch->subset.size(); ++k) {
      const auto& pid = dispatch->subset[k];
      wire::BatchEntry entry;
      entry.pid = pid;
      LsRecord rec;
      if (!lookup(pid, now, rec)) {
        entry.skipped = true;  // dummy or expired: indistinguishable by design
        reply.entries.push_back(std::move(entry));
        continue;
      }
      std::uint32_t d = distance(req_loc, rec.loc);
      if (dispatch->l && d >= *dispatch->l) {
        entry.skipped = true;  // radius filter is strict, and cheaper than the protocol
        reply.entries.push_back(std::move(entry));
        continue;
      }
      auto t0 = steady::now();
      {
        std::lock_guard rlk(rng_mu_);
        entry.batch = distcmp::respond(dispatch->pk_m, distcmp::ThresholdCiphertext{dispatch->threshold_cts[k]},
                                       d, params, rng_);
      }
      respond_us_ += us_since(t0);
      session.candidates[pid.hex()] = rec.loc;
      reply.entries.push_back(std::move(entry));
    }
    return reply;
  }
  if (const auto* verdicts = std::get_if<wire::VerdictMsg>(&msg)) {
    if (!session.pending) fail(Err::MalformedFrame, "verdicts without a pending dispatch");
    wire::LocationResultMsg reply;
    for (const auto& v : verdicts->verdicts) {
      if (!v.within) continue;
      auto it = session.candidates.find(v.pid.hex());
      if (it == session.candidates.end()) continue;
      std::lock_guard rlk(rng_mu_);
      reply.items.push_back(
          {v.pid, asym_encrypt(session.requester_pk, coord_bytes(it->second), rng_)});
    }
    session.pending = false;
    session.candidates.clear();
    return reply;
  }
  fail(Err::UnknownTag, "message not expected by a location server");
}

SessionFactory LsServer::session_factory() {
  return [this]() -> SessionHandler {
    auto session = std::make_shared<Session>();
    return [this, session](const wire::Message& msg) { return handle(*session, msg); };
  };
}

}  // namespace ppls
