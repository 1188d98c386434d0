#include "ppls/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ppls/error.hpp"
#include "ppls/ls.hpp"
#include "ppls/transport.hpp"
#include "ppls/vehicle.hpp"

namespace ppls {

namespace {

using nlohmann::json;
using steady = std::chrono::steady_clock;

const char* qtype_name(wire::QueryType q) {
  switch (q) {
    case wire::QueryType::ParticularFriends: return "pf";
    case wire::QueryType::FriendsWithin: return "f";
    case wire::QueryType::StrangersWithin: return "s";
    case wire::QueryType::All: return "all";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// God view: the test-only plaintext mirror of the whole system. Role modules
// never see it; the runner uses it to score every query and audit.
// ---------------------------------------------------------------------------

class GodView {
 public:
  GodView(const ScenarioConfig& cfg) : tl_ms_(cfg.tl_ms) {
    for (const auto& v : cfg.fleet) {
      vehicles_[v.id] = State{v.loc, v.ds, v.friends, -1};
      coord_history_.insert(coord_bytes(v.loc));
    }
  }

  void mark_store(const std::string& id, std::int64_t now) { vehicles_.at(id).last_store = now; }
  void move(const std::string& id, Coord to) {
    vehicles_.at(id).loc = to;
    coord_history_.insert(coord_bytes(to));
  }

  bool live(const std::string& id, std::int64_t now) const {
    const auto& v = vehicles_.at(id);
    return v.last_store >= 0 && now < v.last_store + tl_ms_;
  }

  Coord loc_of(const std::string& id) const { return vehicles_.at(id).loc; }

  std::uint32_t dist(const std::string& a, const std::string& b) const {
    return distance(vehicles_.at(a).loc, vehicles_.at(b).loc);
  }

  bool friends(const std::string& a, const std::string& b) const {
    return vehicles_.at(a).friends.count(b) != 0;
  }

  std::uint32_t threshold_for(const std::string& owner, const std::string& of) const {
    return vehicles_.at(owner).friends.at(of);
  }

  std::vector<std::string> eligible(const std::string& requester, wire::QueryType qtype,
                                    const std::vector<std::string>& targets, std::uint32_t l,
                                    std::int64_t now) const {
    std::vector<std::string> out;
    if (qtype == wire::QueryType::ParticularFriends) {
      std::set<std::string> seen;
      for (const auto& t : targets) {
        if (t == requester || !seen.insert(t).second) continue;
        auto it = vehicles_.find(t);
        if (it == vehicles_.end()) continue;
        if (!friends(requester, t) || !friends(t, requester)) continue;
        if (!live(t, now)) continue;
        if (dist(requester, t) < threshold_for(t, requester)) out.push_back(t);
      }
    } else if (qtype == wire::QueryType::FriendsWithin) {
      for (const auto& [fid, df] : vehicles_.at(requester).friends) {
        (void)df;
        auto it = vehicles_.find(fid);
        if (it == vehicles_.end() || !friends(fid, requester) || !live(fid, now)) continue;
        std::uint32_t d = dist(requester, fid);
        if (d < threshold_for(fid, requester) && d < l) out.push_back(fid);
      }
    } else {
      for (const auto& [id, v] : vehicles_) {
        if (id == requester || friends(requester, id) || !live(id, now)) continue;
        std::uint32_t d = dist(requester, id);
        if (d < l && d < v.ds) out.push_back(id);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  const std::set<std::array<std::uint8_t, 8>>& coord_history() const { return coord_history_; }

 private:
  struct State {
    Coord loc;
    std::uint32_t ds = 0;
    std::map<std::string, std::uint32_t> friends;
    std::int64_t last_store = -1;
  };

  std::map<std::string, State> vehicles_;
  std::set<std::array<std::uint8_t, 8>> coord_history_;
  std::int64_t tl_ms_;
};

bool contains_bytes(const std::vector<std::uint8_t>& hay, std::span<const std::uint8_t> needle) {
  if (needle.empty() || hay.size() < needle.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

// Scores one query against the policy oracle, both directions.
void check_query(const GodView& god, QueryResult& qr, std::int64_t now) {
  std::ostringstream detail;
  if (!qr.error.empty()) {
    qr.oracle_ok = false;
    qr.oracle_detail = "query failed: " + qr.error;
    return;
  }
  auto eligible = god.eligible(qr.requester, qr.qtype, qr.targets, qr.l, now);
  auto returned = qr.returned_ids;
  std::sort(returned.begin(), returned.end());

  bool ok = returned == eligible;
  if (!ok) {
    detail << "returned {";
    for (const auto& r : returned) detail << r << " ";
    detail << "} eligible {";
    for (const auto& e : eligible) detail << e << " ";
    detail << "}";
  }

  // Labels and coordinates: friend queries label by id, stranger queries by
  // opaque token; coordinates must match the god view either way.
  if (ok) {
    if (qr.items.size() != eligible.size()) {
      ok = false;
      detail << "item count " << qr.items.size() << " != " << eligible.size();
    } else if (qr.qtype == wire::QueryType::StrangersWithin) {
      std::multiset<std::pair<std::uint32_t, std::uint32_t>> got, want;
      for (const auto& it : qr.items) got.insert({it.loc.x, it.loc.y});
      for (const auto& e : eligible) want.insert({god.loc_of(e).x, god.loc_of(e).y});
      if (got != want) {
        ok = false;
        detail << "stranger coordinates do not match eligible set";
      }
      for (const auto& it : qr.items) {
        if (it.label.rfind("anon-", 0) != 0) {
          ok = false;
          detail << "; stranger label leaks: " << it.label;
        }
      }
    } else {
      for (const auto& it : qr.items) {
        if (std::find(eligible.begin(), eligible.end(), it.label) == eligible.end()) {
          ok = false;
          detail << "unexpected label " << it.label;
          break;
        }
        if (!(god.loc_of(it.label) == it.loc)) {
          ok = false;
          detail << "coordinates for " << it.label << " do not match";
          break;
        }
      }
    }
  }

  // Every compared pair must agree with the plaintext comparison.
  for (const auto& cp : qr.compared) {
    bool want = cp.threshold > god.dist(cp.requester, cp.target);
    if (cp.verdict != want) {
      ok = false;
      detail << "; verdict mismatch for " << cp.target;
    }
  }

  qr.oracle_ok = ok;
  qr.oracle_detail = detail.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Config validation and JSON round-trip
// ---------------------------------------------------------------------------

void ScenarioConfig::validate() const {
  auto err = [](const std::string& where, const std::string& what) {
    fail(Err::ConfigInvalid, where + ": " + what);
  };
  if (q < 1 || q > 64) err("q", "must be in [1, 64]");
  if (i_max < 1) err("i_max", "must be positive");
  if (!(tl_ms > t_ms) || tl_ms > 2 * t_ms) err("tl_ms", "must satisfy t < tl <= 2t");
  if (backend != "inproc" && backend != "socket") err("backend", "must be inproc or socket");
  if (paillier_bits < 64) err("paillier_bits", "must be at least 64");
  if (rsa_bits < 512) err("rsa_bits", "must be at least 512");

  std::map<std::string, const FleetVehicle*> by_id;
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const auto& v = fleet[i];
    std::string where = "fleet[" + std::to_string(i) + "]";
    if (v.id.empty()) err(where, "empty id");
    if (v.id == "all") err(where, "'all' is reserved");
    if (!by_id.emplace(v.id, &v).second) err(where, "duplicate id " + v.id);
    if (v.loc.x >= kCoordLimit || v.loc.y >= kCoordLimit) err(where, "coordinates out of range");
    if (v.ds < 1 || v.ds > i_max) err(where, "ds outside [1, i_max]");
    for (const auto& [fid, df] : v.friends) {
      if (df < 1 || df > i_max) err(where, "df for " + fid + " outside [1, i_max]");
      if (fid == v.id) err(where, "lists itself as a friend");
    }
  }
  for (const auto& [id, v] : by_id) {
    for (const auto& [fid, df] : v->friends) {
      (void)df;
      auto other = by_id.find(fid);
      if (other == by_id.end()) err("fleet", id + " lists unknown friend " + fid);
      if (!other->second->friends.count(id))
        err("fleet", "friendship must be symmetric: " + fid + " does not list " + id);
    }
  }
  std::int64_t prev = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    std::string where = "events[" + std::to_string(i) + "]";
    if (e.at_ms < prev) err(where, "events must be ordered by at_ms");
    prev = e.at_ms;
    switch (e.op) {
      case ScenarioEvent::Op::Register:
      case ScenarioEvent::Op::Update:
        if (e.id != "all" && !by_id.count(e.id)) err(where, "unknown vehicle " + e.id);
        break;
      case ScenarioEvent::Op::Move:
        if (!by_id.count(e.id)) err(where, "unknown vehicle " + e.id);
        if (e.to.x >= kCoordLimit || e.to.y >= kCoordLimit) err(where, "coordinates out of range");
        break;
      case ScenarioEvent::Op::EpochAdvance:
      case ScenarioEvent::Op::Purge:
        break;
      case ScenarioEvent::Op::Query:
        if (!by_id.count(e.id)) err(where, "unknown requester " + e.id);
        if (e.qtype == wire::QueryType::All) err(where, "bad query type");
        if (e.qtype != wire::QueryType::ParticularFriends && e.l < 1)
          err(where, "radius must be at least 1");
        break;
    }
  }
}

namespace {

ScenarioEvent::Op op_from_name(const std::string& name) {
  if (name == "register") return ScenarioEvent::Op::Register;
  if (name == "update") return ScenarioEvent::Op::Update;
  if (name == "move") return ScenarioEvent::Op::Move;
  if (name == "epoch_advance") return ScenarioEvent::Op::EpochAdvance;
  if (name == "purge") return ScenarioEvent::Op::Purge;
  if (name == "query") return ScenarioEvent::Op::Query;
  fail(Err::ConfigInvalid, "unknown op '" + name + "'");
}

const char* op_name(ScenarioEvent::Op op) {
  switch (op) {
    case ScenarioEvent::Op::Register: return "register";
    case ScenarioEvent::Op::Update: return "update";
    case ScenarioEvent::Op::Move: return "move";
    case ScenarioEvent::Op::EpochAdvance: return "epoch_advance";
    case ScenarioEvent::Op::Purge: return "purge";
    case ScenarioEvent::Op::Query: return "query";
  }
  return "?";
}

wire::QueryType qtype_from_name(const std::string& name) {
  if (name == "pf") return wire::QueryType::ParticularFriends;
  if (name == "f") return wire::QueryType::FriendsWithin;
  if (name == "s") return wire::QueryType::StrangersWithin;
  fail(Err::ConfigInvalid, "unknown query type '" + name + "'");
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    fail(Err::ConfigInvalid, std::string("json parse: ") + ex.what());
  }
  ScenarioConfig cfg;
  try {
    cfg.seed = j.value("seed", cfg.seed);
    cfg.q = j.value("q", cfg.q);
    cfg.i_max = j.value("i_max", cfg.i_max);
    cfg.paillier_bits = j.value("paillier_bits", cfg.paillier_bits);
    cfg.rsa_bits = j.value("rsa_bits", cfg.rsa_bits);
    cfg.t_ms = j.value("t_ms", cfg.t_ms);
    cfg.tl_ms = j.value("tl_ms", cfg.tl_ms);
    cfg.dummy_count = j.value("dummy_count", cfg.dummy_count);
    cfg.backend = j.value("backend", cfg.backend);
    for (const auto& jv : j.value("fleet", json::array())) {
      FleetVehicle v;
      v.id = jv.at("id").get<std::string>();
      v.loc = {jv.at("x").get<std::uint32_t>(), jv.at("y").get<std::uint32_t>()};
      v.ds = jv.at("ds").get<std::uint32_t>();
      for (const auto& jf : jv.value("friends", json::array()))
        v.friends[jf.at("id").get<std::string>()] = jf.at("df").get<std::uint32_t>();
      cfg.fleet.push_back(std::move(v));
    }
    for (const auto& je : j.value("events", json::array())) {
      ScenarioEvent e;
      e.at_ms = je.at("at_ms").get<std::int64_t>();
      e.op = op_from_name(je.at("op").get<std::string>());
      e.id = je.value("id", std::string());
      if (e.op == ScenarioEvent::Op::Query) {
        e.id = je.at("requester").get<std::string>();
        e.qtype = qtype_from_name(je.at("type").get<std::string>());
        if (e.qtype == wire::QueryType::ParticularFriends)
          e.targets = je.at("targets").get<std::vector<std::string>>();
        else
          e.l = je.at("l").get<std::uint32_t>();
      }
      if (e.op == ScenarioEvent::Op::Move) {
        e.to = {je.at("x").get<std::uint32_t>(), je.at("y").get<std::uint32_t>()};
      }
      cfg.events.push_back(std::move(e));
    }
  } catch (const json::exception& ex) {
    fail(Err::ConfigInvalid, std::string("config shape: ") + ex.what());
  }
  cfg.validate();
  return cfg;
}

std::string ScenarioConfig::to_json_text() const {
  json j;
  j["seed"] = seed;
  j["q"] = q;
  j["i_max"] = i_max;
  j["paillier_bits"] = paillier_bits;
  j["rsa_bits"] = rsa_bits;
  j["t_ms"] = t_ms;
  j["tl_ms"] = tl_ms;
  j["dummy_count"] = dummy_count;
  j["backend"] = backend;
  j["fleet"] = json::array();
  for (const auto& v : fleet) {
    json jv{{"id", v.id}, {"x", v.loc.x}, {"y", v.loc.y}, {"ds", v.ds}};
    jv["friends"] = json::array();
    for (const auto& [fid, df] : v.friends) jv["friends"].push_back({{"id", fid}, {"df", df}});
    j["fleet"].push_back(std::move(jv));
  }
  j["events"] = json::array();
  for (const auto& e : events) {
    json je{{"at_ms", e.at_ms}, {"op", op_name(e.op)}};
    if (e.op == ScenarioEvent::Op::Query) {
      je["requester"] = e.id;
      je["type"] = qtype_name(e.qtype);
      if (e.qtype == wire::QueryType::ParticularFriends)
        je["targets"] = e.targets;
      else
        je["l"] = e.l;
    } else if (e.op == ScenarioEvent::Op::Move) {
      je["id"] = e.id;
      je["x"] = e.to.x;
      je["y"] = e.to.y;
    } else if (!e.id.empty()) {
      je["id"] = e.id;
    }
    j["events"].push_back(std::move(je));
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

bool ScenarioReport::passed() const {
  if (!event_errors.empty()) return false;
  for (const auto& q : queries)
    if (!q.oracle_ok) return false;
  for (const auto& a : audits)
    if (!a.pass) return false;
  return true;
}

std::string ScenarioReport::to_json_text(bool include_timings) const {
  json j;
  j["epochs"] = epochs;
  j["messages"] = messages;
  j["passed"] = passed();
  j["event_errors"] = event_errors;
  j["queries"] = json::array();
  for (const auto& q : queries) {
    json jq{{"at_ms", q.at_ms},       {"requester", q.requester},
            {"type", qtype_name(q.qtype)}, {"oracle_ok", q.oracle_ok}};
    if (!q.targets.empty()) jq["targets"] = q.targets;
    if (q.qtype != wire::QueryType::ParticularFriends) jq["l"] = q.l;
    if (!q.error.empty()) jq["error"] = q.error;
    if (!q.oracle_detail.empty()) jq["oracle_detail"] = q.oracle_detail;
    jq["returned"] = json::array();
    for (const auto& it : q.items)
      jq["returned"].push_back({{"label", it.label}, {"x", it.loc.x}, {"y", it.loc.y}});
    jq["returned_ids"] = q.returned_ids;
    jq["compared"] = json::array();
    for (const auto& cp : q.compared)
      jq["compared"].push_back(
          {{"target", cp.target}, {"threshold", cp.threshold}, {"verdict", cp.verdict}});
    if (include_timings) {
      jq["total_ms"] = q.total_ms;
      jq["cmp_ms"] = q.cmp_ms;
    }
    j["queries"].push_back(std::move(jq));
  }
  j["audits"] = json::array();
  for (const auto& a : audits)
    j["audits"].push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
  return j.dump(2);
}

ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioReport report;

  auto clock = std::make_shared<SimClock>();
  TransportLog log;
  std::unique_ptr<Network> net =
      cfg.backend == "socket" ? make_tcp_network() : make_inproc_network();
  net->set_log(&log);

  Rng harness_rng(Rng::derive_seed(cfg.seed, "harness"));
  RsaKeypair ls_keys = asym_keygen(cfg.rsa_bits, harness_rng);

  std::vector<std::unique_ptr<LsServer>> stations;
  for (std::uint32_t j = 0; j < cfg.q; ++j) {
    stations.push_back(std::make_unique<LsServer>(
        LsConfig{j, cfg.i_max, Bn(1)}, ls_keys, clock,
        Bn::from_bytes_be(Rng::derive_seed(cfg.seed, "ls" + std::to_string(j))).to_u64()));
    net->serve("ls" + std::to_string(j), stations.back()->session_factory());
  }

  SnsConfig sns_cfg;
  sns_cfg.q = cfg.q;
  sns_cfg.i_max = cfg.i_max;
  sns_cfg.t_ms = cfg.t_ms;
  sns_cfg.tl_ms = cfg.tl_ms;
  sns_cfg.dummy_count = cfg.dummy_count;
  sns_cfg.paillier_bits = cfg.paillier_bits;
  auto sns = std::make_unique<SnsServer>(
      sns_cfg, ls_keys.pub, *net, clock,
      Bn::from_bytes_be(Rng::derive_seed(cfg.seed, "sns")).to_u64());
  net->serve("sns", sns->session_factory());

  std::map<std::string, std::unique_ptr<VehicleClient>> vehicles;
  for (const auto& v : cfg.fleet) {
    vehicles[v.id] = std::make_unique<VehicleClient>(
        v.id, v.loc, v.friends, v.ds, ls_keys.pub, cfg.rsa_bits,
        Bn::from_bytes_be(Rng::derive_seed(cfg.seed, "vehicle-" + v.id)).to_u64());
  }

  GodView god(cfg);

  auto vehicle_request = [&](const std::string& id, const wire::Message& msg) {
    auto ch = net->connect("vehicle:" + id, "sns");
    auto reply = ch->request(msg);
    ch->close();
    return reply;
  };

  auto enroll = [&](const std::string& id, bool is_update, std::int64_t now) {
    auto& v = *vehicles.at(id);
    wire::Message msg = is_update ? wire::Message(v.build_update(now))
                                  : wire::Message(v.build_registration(now));
    auto reply = vehicle_request(id, msg);
    if (std::holds_alternative<wire::Ack>(reply)) {
      god.mark_store(id, now);
    } else if (auto* err = std::get_if<wire::ErrorMsg>(&reply)) {
      report.event_errors.push_back(id + (is_update ? " update: " : " register: ") + err->detail);
    }
  };

  for (const auto& ev : cfg.events) {
    clock->set_ms(ev.at_ms);
    switch (ev.op) {
      case ScenarioEvent::Op::Register:
      case ScenarioEvent::Op::Update: {
        bool is_update = ev.op == ScenarioEvent::Op::Update;
        if (ev.id == "all") {
          for (const auto& v : cfg.fleet) enroll(v.id, is_update, ev.at_ms);
        } else {
          enroll(ev.id, is_update, ev.at_ms);
        }
        break;
      }
      case ScenarioEvent::Op::Move:
        vehicles.at(ev.id)->set_location(ev.to);
        god.move(ev.id, ev.to);
        break;
      case ScenarioEvent::Op::EpochAdvance:
        sns->epoch_advance(ev.at_ms);
        break;
      case ScenarioEvent::Op::Purge:
        for (auto& st : stations) st->purge_expired(ev.at_ms);
        break;
      case ScenarioEvent::Op::Query: {
        auto& v = *vehicles.at(ev.id);
        QueryResult qr;
        qr.at_ms = ev.at_ms;
        qr.requester = ev.id;
        qr.qtype = ev.qtype;
        qr.targets = ev.targets;
        qr.l = ev.l;

        sns->reset_stats();
        for (auto& st : stations) st->reset_stats();
        wire::Message msg;
        if (ev.qtype == wire::QueryType::ParticularFriends)
          msg = v.query_particular_friends(ev.targets);
        else if (ev.qtype == wire::QueryType::FriendsWithin)
          msg = v.query_friends_within(ev.l);
        else
          msg = v.query_strangers_within(ev.l);

        auto t0 = steady::now();
        auto reply = vehicle_request(ev.id, msg);
        qr.total_ms =
            std::chrono::duration<double, std::milli>(steady::now() - t0).count();
        std::int64_t cmp_us = sns->cmp_us();
        for (auto& st : stations) cmp_us += st->respond_us();
        qr.cmp_ms = double(cmp_us) / 1000.0;

        if (auto* err = std::get_if<wire::ErrorMsg>(&reply)) {
          qr.error = err->detail;
        } else if (auto* rep = std::get_if<wire::ReplyToVehicle>(&reply)) {
          for (auto& [label, loc] : v.decrypt_response(*rep)) qr.items.push_back({label, loc});
        }
        for (auto& account : sns->drain_accounts()) {
          qr.returned_ids.insert(qr.returned_ids.end(), account.returned_ids.begin(),
                                 account.returned_ids.end());
          qr.compared.insert(qr.compared.end(), account.compared.begin(), account.compared.end());
          // Partition soundness: the dispatched real PIDs must be exactly the
          // target set, each exactly once.
          auto dispatched = account.dispatched_real_pids;
          auto targets = account.target_pids;
          std::sort(dispatched.begin(), dispatched.end());
          std::sort(targets.begin(), targets.end());
          if (dispatched != targets)
            report.event_errors.push_back("partition unsound for query by " + ev.id);
        }
        check_query(god, qr, ev.at_ms);
        report.queries.push_back(std::move(qr));
        break;
      }
    }
  }

  report.epochs = sns->epoch_index() + 1;

  // Blindness audits over the raw transport log and station state.
  auto entries = log.snapshot();
  report.messages = entries.size();

  {
    AuditResult a{"sns-location-blindness", true, ""};
    for (const auto& e : entries) {
      if (e.sender != "sns" && e.receiver != "sns") continue;
      for (const auto& pattern : god.coord_history()) {
        if (contains_bytes(e.frame, pattern)) {
          a.pass = false;
          a.detail = "coordinate bytes in frame #" + std::to_string(e.seq) + " (" + e.sender +
                     " -> " + e.receiver + ")";
          break;
        }
      }
      if (!a.pass) break;
    }
    report.audits.push_back(std::move(a));
  }
  {
    AuditResult a{"ls-identity-blindness", true, ""};
    for (const auto& e : entries) {
      bool ls_adjacent = e.sender.rfind("ls", 0) == 0 || e.receiver.rfind("ls", 0) == 0;
      if (!ls_adjacent) continue;
      for (const auto& v : cfg.fleet) {
        std::span<const std::uint8_t> needle{
            reinterpret_cast<const std::uint8_t*>(v.id.data()), v.id.size()};
        if (contains_bytes(e.frame, needle)) {
          a.pass = false;
          a.detail = "identity '" + v.id + "' in frame #" + std::to_string(e.seq);
          break;
        }
      }
      if (!a.pass) break;
    }
    if (a.pass) {
      for (const auto& st : stations) {
        auto dump = st->state_dump();
        for (const auto& v : cfg.fleet) {
          if (dump.find(v.id) != std::string::npos) {
            a.pass = false;
            a.detail = "identity '" + v.id + "' in station state";
            break;
          }
        }
        if (!a.pass) break;
      }
    }
    report.audits.push_back(std::move(a));
  }
  {
    AuditResult a{"pid-epoch-disjointness", true, ""};
    auto sets = sns->epoch_pid_sets();
    for (std::size_t i = 0; i < sets.size() && a.pass; ++i) {
      for (std::size_t j = i + 1; j < sets.size() && a.pass; ++j) {
        for (const auto& pid : sets[i]) {
          if (sets[j].count(pid)) {
            a.pass = false;
            a.detail = "pid reused across epochs " + std::to_string(i) + " and " + std::to_string(j);
            break;
          }
        }
      }
    }
    report.audits.push_back(std::move(a));
  }

  // Orderly teardown: client channels are already closed; drop the social
  // server's station channels, then join every session.
  sns.reset();
  net->shutdown();
  return report;
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

ScenarioConfig three_vehicle_fixture() {
  ScenarioConfig cfg;
  cfg.seed = 7;
  cfg.q = 3;
  cfg.i_max = 200;
  cfg.paillier_bits = 512;
  cfg.rsa_bits = 512;
  cfg.t_ms = 10'000;
  cfg.tl_ms = 15'000;
  cfg.dummy_count = 1;
  cfg.fleet = {
      {"alice", {1500, 1500}, 150, {{"bob", 60}}},
      {"bob", {1530, 1500}, 100, {{"alice", 50}}},   // 30 m from alice
      {"carol", {1580, 1500}, 200, {}},              // 80 m from alice, stranger
  };
  auto q = [](std::int64_t at, const std::string& req, wire::QueryType t,
              std::vector<std::string> targets, std::uint32_t l) {
    ScenarioEvent e;
    e.at_ms = at;
    e.op = ScenarioEvent::Op::Query;
    e.id = req;
    e.qtype = t;
    e.targets = std::move(targets);
    e.l = l;
    return e;
  };
  ScenarioEvent reg{0, ScenarioEvent::Op::Register, "all", {}, {}, {}, 0};
  ScenarioEvent advance{10'000, ScenarioEvent::Op::EpochAdvance, "", {}, {}, {}, 0};
  ScenarioEvent update{10'000, ScenarioEvent::Op::Update, "all", {}, {}, {}, 0};
  ScenarioEvent purge{15'500, ScenarioEvent::Op::Purge, "", {}, {}, {}, 0};
  cfg.events = {
      reg,
      q(4'000, "alice", wire::QueryType::ParticularFriends, {"bob"}, 0),
      q(5'000, "alice", wire::QueryType::FriendsWithin, {}, 40),
      q(6'000, "alice", wire::QueryType::StrangersWithin, {}, 100),
      advance,
      update,
      purge,
      q(16'000, "alice", wire::QueryType::ParticularFriends, {"bob"}, 0),
      q(17'000, "alice", wire::QueryType::StrangersWithin, {}, 100),
  };
  return cfg;
}

ScenarioConfig random_scenario(std::uint64_t seed, std::size_t n_vehicles) {
  Rng rng(Rng::derive_seed(seed, "scenario-gen"));
  ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.q = 3;
  cfg.i_max = 200;
  cfg.paillier_bits = 512;
  cfg.rsa_bits = 512;
  cfg.t_ms = 10'000;
  cfg.tl_ms = 15'000;
  cfg.dummy_count = 1;

  // Fleet in a compact square so queries actually hit; offset past 1024 so no
  // coordinate byte pattern can collide with a small structured field.
  for (std::size_t i = 0; i < n_vehicles; ++i) {
    FleetVehicle v;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "vehicle-%02zu", i);
    v.id = buf;
    v.loc = {1100 + rng.u32_below(220), 1100 + rng.u32_below(220)};
    v.ds = (1 + rng.u32_below(2)) * 100;  // 100 or 200
    cfg.fleet.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < n_vehicles; ++i) {
    for (std::size_t j = i + 1; j < n_vehicles; ++j) {
      if (rng.u32_below(100) < 15) {
        cfg.fleet[i].friends[cfg.fleet[j].id] = (1 + rng.u32_below(10)) * 10;
        cfg.fleet[j].friends[cfg.fleet[i].id] = (1 + rng.u32_below(10)) * 10;
      }
    }
  }

  // One vehicle may stop updating after registration, so later epochs must
  // treat it as expired. It never acts as a requester: its own station
  // records expire too.
  std::size_t dropout = rng.u32_below(100) < 30 ? rng.u32_below(std::uint32_t(n_vehicles))
                                                : n_vehicles;

  ScenarioEvent reg{0, ScenarioEvent::Op::Register, "all", {}, {}, {}, 0};
  cfg.events.push_back(reg);

  auto add_queries = [&](std::int64_t base) {
    for (int k = 0; k < 6; ++k) {
      ScenarioEvent e;
      e.at_ms = base + 500 * (k + 1);
      e.op = ScenarioEvent::Op::Query;
      std::size_t req = rng.u32_below(std::uint32_t(n_vehicles));
      if (req == dropout) req = (req + 1) % n_vehicles;
      e.id = cfg.fleet[req].id;
      int t = k % 3;
      if (t == 0) {
        e.qtype = wire::QueryType::ParticularFriends;
        // request a few arbitrary vehicles: non-friends and unknown ids must
        // be silently excluded
        std::vector<std::string> pool;
        for (const auto& fv : cfg.fleet)
          if (fv.id != e.id) pool.push_back(fv.id);
        rng.shuffle(pool);
        std::size_t take = 1 + rng.u32_below(3);
        for (std::size_t m = 0; m < take && m < pool.size(); ++m) e.targets.push_back(pool[m]);
        if (rng.u32_below(100) < 20) e.targets.push_back("vehicle-unknown");
      } else if (t == 1) {
        e.qtype = wire::QueryType::FriendsWithin;
        e.l = 30 + rng.u32_below(170);
      } else {
        e.qtype = wire::QueryType::StrangersWithin;
        e.l = 30 + rng.u32_below(170);
      }
      cfg.events.push_back(std::move(e));
    }
  };

  add_queries(4'000);

  for (int epoch = 1; epoch <= 2; ++epoch) {
    std::int64_t t0 = epoch * 10'000;
    ScenarioEvent advance{t0, ScenarioEvent::Op::EpochAdvance, "", {}, {}, {}, 0};
    cfg.events.push_back(advance);
    for (std::size_t i = 0; i < n_vehicles; ++i) {
      if (rng.u32_below(100) < 30) {
        ScenarioEvent mv{t0, ScenarioEvent::Op::Move, cfg.fleet[i].id,
                         Coord{1100 + rng.u32_below(220), 1100 + rng.u32_below(220)},
                         {}, {}, 0};
        cfg.events.push_back(std::move(mv));
      }
    }
    for (std::size_t i = 0; i < n_vehicles; ++i) {
      if (i == dropout) continue;
      ScenarioEvent up{t0, ScenarioEvent::Op::Update, cfg.fleet[i].id, {}, {}, {}, 0};
      cfg.events.push_back(std::move(up));
    }
    ScenarioEvent purge{t0 + 5'500, ScenarioEvent::Op::Purge, "", {}, {}, {}, 0};
    cfg.events.push_back(purge);
    // Queries run after the previous epoch's records expired, so stale
    // locations cannot satisfy the radius pre-filter.
    add_queries(t0 + 5'500);
  }
  return cfg;
}

}  // namespace ppls
