#include "ppls/sns.hpp"

#include <algorithm>
#include <chrono>

#include "ppls/error.hpp"
#include "ppls/paillier.hpp"

namespace ppls {

namespace {

using steady = std::chrono::steady_clock;

std::int64_t us_since(steady::time_point t0) {
  return std::chrono::duration_cast<std::chrono::microseconds>(steady::now() - t0).count();
}

std::vector<std::uint8_t> signed_payload(const std::string& id, std::int64_t ts_ms) {
  std::vector<std::uint8_t> m(id.begin(), id.end());
  auto u = static_cast<std::uint64_t>(ts_ms);
  for (int i = 56; i >= 0; i -= 8) m.push_back(std::uint8_t(u >> i));
  return m;
}

}  // namespace

PartitionPlan partition_pids(const std::vector<PseudoIdentity>& pids, std::uint32_t q,
                             std::uint32_t dummy_count, Rng& rng) {
  if (q < 1) fail(Err::ConfigInvalid, "at least one location server required");
  PartitionPlan plan;
  plan.dummy_count = dummy_count;
  plan.subsets.resize(q);
  for (const auto& pid : pids) plan.subsets[rng.u32_below(q)].push_back(pid);
  for (auto& subset : plan.subsets) {
    for (std::uint32_t i = 0; i < dummy_count; ++i) {
      PseudoIdentity dummy;
      auto raw = rng.bytes(dummy.bytes.size());
      std::copy(raw.begin(), raw.end(), dummy.bytes.begin());
      subset.push_back(dummy);
    }
    rng.shuffle(subset);  // dummies must not sit at a fixed position
  }
  return plan;
}

SnsServer::SnsServer(SnsConfig cfg, RsaPublicKey ls_pk, Network& net,
                     std::shared_ptr<SimClock> clock, std::uint64_t seed)
    : cfg_(cfg), ls_pk_(std::move(ls_pk)), net_(net), clock_(std::move(clock)), rng_(seed) {
  if (cfg_.q < 1) fail(Err::ConfigInvalid, "q must be at least 1");
  if (!(cfg_.tl_ms > cfg_.t_ms) || cfg_.tl_ms > 2 * cfg_.t_ms)
    fail(Err::ConfigInvalid, "record lifetime must satisfy t < tl <= 2t");
  epoch_key_ = rng_.key128();
  epoch_pids_.emplace_back();
}

void SnsServer::validate_enrollment(const wire::Enrollment& msg, const RsaPublicKey& verify_key,
                                    std::int64_t now) const {
  if (!verify(verify_key, signed_payload(msg.id, msg.ts_ms), msg.sig))
    fail(Err::BadSignature, "signature does not verify for " + msg.id);
  std::int64_t skew = msg.ts_ms > now ? msg.ts_ms - now : now - msg.ts_ms;
  if (skew > cfg_.clock_skew_ms) fail(Err::StaleTimestamp, "timestamp outside the freshness window");
  for (const auto& f : msg.friends) {
    if (f.df < 1 || f.df > cfg_.i_max)
      fail(Err::ThresholdOutOfRange, "friend threshold outside [1, i_max]");
  }
  if (msg.ds < 1 || msg.ds > cfg_.i_max)
    fail(Err::ThresholdOutOfRange, "stranger threshold outside [1, i_max]");
}

void SnsServer::upsert_record(const wire::Enrollment& msg) {
  SnsVehicleRecord rec;
  rec.id = msg.id;
  rec.pk_on_file = msg.pk_plain;
  for (const auto& f : msg.friends) {
    rec.friend_list.insert(f.id);
    rec.friend_thresholds[f.id] = f.df;
  }
  rec.stranger_threshold = msg.ds;
  rec.current_pid = pid_derive(msg.id, epoch_key_);
  rec.enc_loc_passthrough = msg.enc_loc;
  rec.enc_pk_passthrough = msg.enc_pk;

  pid_to_id_[rec.current_pid.hex()] = rec.id;
  epoch_pids_[epoch_index_].insert(rec.current_pid.hex());
  records_[msg.id] = std::move(rec);
}

void SnsServer::fan_out_store(const SnsVehicleRecord& rec) {
  // Records replicate to every station; only query work is partitioned.
  if (control_.empty()) {
    for (std::uint32_t j = 0; j < cfg_.q; ++j)
      control_.push_back(net_.connect("sns", "ls" + std::to_string(j)));
  }
  wire::StoreRecord store{rec.current_pid, rec.enc_loc_passthrough, rec.enc_pk_passthrough,
                          cfg_.tl_ms};
  for (auto& ch : control_) {
    auto reply = ch->request(store);
    if (!std::holds_alternative<wire::Ack>(reply)) {
      // An honest vehicle never triggers this; a rejected ciphertext only
      // means that station has no usable record.
    }
  }
}

wire::Message SnsServer::handle_registration(const wire::Registration& msg, std::int64_t now) {
  std::lock_guard lk(mu_);
  auto it = records_.find(msg.id);
  // Trust the carried key on first contact; afterwards the key on file must
  // authorize any replacement.
  const RsaPublicKey& verify_key = it == records_.end() ? msg.pk_plain : it->second.pk_on_file;
  validate_enrollment(msg, verify_key, now);
  upsert_record(msg);
  fan_out_store(records_.at(msg.id));
  return wire::Ack{};
}

wire::Message SnsServer::handle_update(const wire::Update& msg, std::int64_t now) {
  std::lock_guard lk(mu_);
  auto it = records_.find(msg.id);
  if (it == records_.end()) fail(Err::UnknownVehicle, "update for unregistered vehicle");
  validate_enrollment(msg, it->second.pk_on_file, now);
  upsert_record(msg);
  fan_out_store(records_.at(msg.id));
  return wire::Ack{};
}

std::uint64_t SnsServer::epoch_advance(std::int64_t) {
  std::lock_guard lk(mu_);
  epoch_key_ = rng_.key128();
  ++epoch_index_;
  epoch_pids_.emplace_back();
  return epoch_index_;
}

bool SnsServer::has_record(const std::string& id) const {
  std::lock_guard lk(mu_);
  return records_.count(id) != 0;
}

PseudoIdentity SnsServer::current_pid(const std::string& id) const {
  std::lock_guard lk(mu_);
  auto it = records_.find(id);
  if (it == records_.end()) fail(Err::UnknownVehicle, id);
  return it->second.current_pid;
}

std::uint32_t SnsServer::friend_threshold(const std::string& owner, const std::string& of) const {
  std::lock_guard lk(mu_);
  auto it = records_.find(owner);
  if (it == records_.end()) fail(Err::UnknownVehicle, owner);
  auto ft = it->second.friend_thresholds.find(of);
  if (ft == it->second.friend_thresholds.end()) fail(Err::UnknownTarget, of);
  return ft->second;
}

std::vector<std::set<std::string>> SnsServer::epoch_pid_sets() const {
  std::lock_guard lk(mu_);
  return epoch_pids_;
}

std::vector<QueryAccount> SnsServer::drain_accounts() {
  std::lock_guard lk(mu_);
  auto out = std::move(accounts_);
  accounts_.clear();
  return out;
}

wire::ReplyToVehicle SnsServer::orchestrate(const SnsVehicleRecord& requester,
                                            const HybridCiphertext& enc_loc, wire::QueryType qtype,
                                            const std::vector<TargetEntry>& targets,
                                            std::optional<std::uint32_t> l, QueryAccount& account) {
  auto t0 = steady::now();
  paillier::Keypair judging_keys = [&] {
    std::lock_guard lk(mu_);
    return paillier::keygen(cfg_.paillier_bits, rng_);
  }();
  cmp_us_ += us_since(t0);

  std::map<std::string, TargetEntry> by_pid;
  std::vector<PseudoIdentity> pids;
  for (const auto& t : targets) {
    by_pid[t.pid.hex()] = t;
    pids.push_back(t.pid);
    account.target_pids.push_back(t.pid.hex());
  }

  PartitionPlan plan;
  {
    std::lock_guard lk(mu_);
    plan = partition_pids(pids, cfg_.q, cfg_.dummy_count, rng_);
  }

  distcmp::ComparisonParams params{cfg_.cmp_g, cfg_.i_max};
  wire::ReplyToVehicle reply;
  std::uint32_t stranger_label = 0;

  for (std::uint32_t j = 0; j < cfg_.q; ++j) {
    const auto& subset = plan.subsets[j];
    if (subset.empty()) continue;

    wire::SubsetDispatch dispatch;
    dispatch.requester = requester.current_pid;
    dispatch.enc_loc = enc_loc;
    dispatch.qtype = qtype;
    dispatch.ls_index = j;
    dispatch.subset = subset;
    dispatch.pk_m = judging_keys.pub;
    dispatch.l = l;
    for (const auto& pid : subset) {
      auto it = by_pid.find(pid.hex());
      std::uint32_t threshold;
      {
        std::lock_guard lk(mu_);
        // Dummies get a plausible threshold; on the wire it is
        // indistinguishable from a real one.
        threshold = it != by_pid.end() ? it->second.threshold : 1 + rng_.u32_below(cfg_.i_max);
        auto tc = steady::now();
        dispatch.threshold_cts.push_back(
            distcmp::make_threshold_ct(judging_keys.pub, threshold, params, rng_).ct);
        cmp_us_ += us_since(tc);
      }
      if (it != by_pid.end()) account.dispatched_real_pids.push_back(pid.hex());
    }

    auto ch = net_.connect("sns", "ls" + std::to_string(j));
    auto batches_reply = ch->request(dispatch);
    if (auto* err = std::get_if<wire::ErrorMsg>(&batches_reply))
      fail(static_cast<Err>(err->code), "station " + std::to_string(j) + ": " + err->detail);
    auto& batches = std::get<wire::ComparisonBatchMsg>(batches_reply);

    wire::VerdictMsg verdicts;
    for (const auto& entry : batches.entries) {
      if (entry.skipped) continue;
      auto tj = steady::now();
      bool within = distcmp::judge(judging_keys.priv, entry.batch);
      cmp_us_ += us_since(tj);
      verdicts.verdicts.push_back({entry.pid, within});
      auto it = by_pid.find(entry.pid.hex());
      if (it != by_pid.end())
        account.compared.push_back(
            {requester.id, it->second.id, it->second.threshold, within});
    }

    auto locations_reply = ch->request(verdicts);
    if (auto* err = std::get_if<wire::ErrorMsg>(&locations_reply))
      fail(static_cast<Err>(err->code), "station " + std::to_string(j) + ": " + err->detail);
    auto& locations = std::get<wire::LocationResultMsg>(locations_reply);
    for (auto& item : locations.items) {
      auto it = by_pid.find(item.pid.hex());
      if (it == by_pid.end()) continue;
      account.returned_ids.push_back(it->second.id);
      std::string label = qtype == wire::QueryType::StrangersWithin
                              ? "anon-" + std::to_string(++stranger_label)
                              : it->second.id;
      reply.items.push_back({std::move(label), std::move(item.enc_loc)});
    }
    ch->close();
  }
  return reply;
}

wire::Message SnsServer::handle_query_pf(const wire::QueryParticularFriends& msg, std::int64_t now) {
  (void)now;
  SnsVehicleRecord requester;
  std::vector<TargetEntry> targets;
  {
    std::lock_guard lk(mu_);
    auto it = records_.find(msg.id);
    if (it == records_.end()) fail(Err::UnknownVehicle, "unregistered requester");
    requester = it->second;
    std::set<std::string> seen;
    for (const auto& target_id : msg.targets) {
      if (target_id == msg.id || !seen.insert(target_id).second) continue;
      auto rec = records_.find(target_id);
      // Unknown ids and non-friends are silently excluded: erroring would
      // leak membership to the requester.
      if (rec == records_.end()) continue;
      auto ft = rec->second.friend_thresholds.find(msg.id);
      if (ft == rec->second.friend_thresholds.end()) continue;
      if (!requester.friend_list.count(target_id)) continue;
      targets.push_back({target_id, rec->second.current_pid, ft->second});
    }
  }
  QueryAccount account{msg.id, wire::QueryType::ParticularFriends, {}, {}, {}, {}};
  auto reply = orchestrate(requester, msg.enc_loc, wire::QueryType::ParticularFriends, targets,
                           std::nullopt, account);
  std::lock_guard lk(mu_);
  accounts_.push_back(std::move(account));
  return reply;
}

wire::Message SnsServer::handle_query_f(const wire::QueryFriendsWithin& msg, std::int64_t now) {
  (void)now;
  if (msg.l < 1) fail(Err::RadiusOutOfRange, "l must be at least 1");
  SnsVehicleRecord requester;
  std::vector<TargetEntry> targets;
  {
    std::lock_guard lk(mu_);
    auto it = records_.find(msg.id);
    if (it == records_.end()) fail(Err::UnknownVehicle, "unregistered requester");
    requester = it->second;
    for (const auto& friend_id : requester.friend_list) {
      auto rec = records_.find(friend_id);
      if (rec == records_.end()) continue;
      auto ft = rec->second.friend_thresholds.find(msg.id);
      if (ft == rec->second.friend_thresholds.end()) continue;
      targets.push_back({friend_id, rec->second.current_pid, ft->second});
    }
  }
  QueryAccount account{msg.id, wire::QueryType::FriendsWithin, {}, {}, {}, {}};
  auto reply =
      orchestrate(requester, msg.enc_loc, wire::QueryType::FriendsWithin, targets, msg.l, account);
  std::lock_guard lk(mu_);
  accounts_.push_back(std::move(account));
  return reply;
}

wire::Message SnsServer::handle_query_s(const wire::QueryStrangersWithin& msg, std::int64_t now) {
  (void)now;
  if (msg.l < 1) fail(Err::RadiusOutOfRange, "l must be at least 1");
  SnsVehicleRecord requester;
  {
    std::lock_guard lk(mu_);
    auto it = records_.find(msg.id);
    if (it == records_.end()) fail(Err::UnknownVehicle, "unregistered requester");
    requester = it->second;
  }

  // Range pre-query to one random station; records replicate, so any one
  // station can answer.
  std::uint32_t station;
  {
    std::lock_guard lk(mu_);
    station = rng_.u32_below(cfg_.q);
  }
  auto ch = net_.connect("sns", "ls" + std::to_string(station));
  auto range_reply = ch->request(wire::RangePreQuery{requester.current_pid, msg.l});
  ch->close();
  if (auto* err = std::get_if<wire::ErrorMsg>(&range_reply))
    fail(static_cast<Err>(err->code), "range pre-query: " + std::string(err->detail));
  auto& range = std::get<wire::RangePreResult>(range_reply);

  // Resolve PIDs (any epoch) back to identities, drop self and friends, and
  // deduplicate vehicles that still have an unexpired previous-epoch record.
  std::vector<TargetEntry> targets;
  {
    std::lock_guard lk(mu_);
    std::set<std::string> seen;
    for (const auto& pid : range.pids) {
      auto mapped = pid_to_id_.find(pid.hex());
      if (mapped == pid_to_id_.end()) continue;
      const std::string& id = mapped->second;
      if (id == msg.id || requester.friend_list.count(id) || !seen.insert(id).second) continue;
      auto rec = records_.find(id);
      if (rec == records_.end()) continue;
      targets.push_back({id, rec->second.current_pid, rec->second.stranger_threshold});
    }
  }
  QueryAccount account{msg.id, wire::QueryType::StrangersWithin, {}, {}, {}, {}};
  auto reply = orchestrate(requester, msg.enc_loc, wire::QueryType::StrangersWithin, targets,
                           std::nullopt, account);
  std::lock_guard lk(mu_);
  accounts_.push_back(std::move(account));
  return reply;
}

SessionFactory SnsServer::session_factory() {
  return [this]() -> SessionHandler {
    return [this](const wire::Message& msg) -> wire::Message {
      std::int64_t now = clock_->now_ms();
      if (const auto* reg = std::get_if<wire::Registration>(&msg)) return handle_registration(*reg, now);
      if (const auto* upd = std::get_if<wire::Update>(&msg)) return handle_update(*upd, now);
      if (const auto* q = std::get_if<wire::QueryParticularFriends>(&msg)) return handle_query_pf(*q, now);
      if (const auto* q = std::get_if<wire::QueryFriendsWithin>(&msg)) return handle_query_f(*q, now);
      if (const auto* q = std::get_if<wire::QueryStrangersWithin>(&msg)) return handle_query_s(*q, now);
      fail(Err::UnknownTag, "message not expected by the social network server");
    };
  };
}

}  // namespace ppls
