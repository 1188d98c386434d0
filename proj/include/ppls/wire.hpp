#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ppls/asym.hpp"
#include "ppls/distcmp.hpp"
#include "ppls/paillier.hpp"

namespace ppls::wire {

/// Frame layout: "PPLS" | version 0x01 | tag | u32 body length | body.
/// Body fields follow declaration order; variable-length fields carry a
/// 32-bit big-endian length prefix, integers are big-endian magnitudes,
/// coordinates two 32-bit big-endian words.
inline constexpr std::uint8_t kWireVersion = 0x01;

enum class MsgTag : std::uint8_t {
  Registration = 0x01,
  Update = 0x02,
  StoreRecord = 0x03,
  QueryParticularFriends = 0x04,
  QueryFriendsWithin = 0x05,
  QueryStrangersWithin = 0x06,
  SubsetDispatch = 0x07,
  RangePreQuery = 0x08,
  RangePreResult = 0x09,
  ComparisonBatch = 0x0A,
  Verdicts = 0x0B,
  LocationResult = 0x0C,
  ReplyToVehicle = 0x0D,
  Ack = 0x0E,
  Error = 0x0F,
};

const char* tag_name(MsgTag tag);

/// Request-type byte carried inside queries and dispatches.
enum class QueryType : std::uint8_t {
  ParticularFriends = 0x01,  // pf
  FriendsWithin = 0x02,      // f
  StrangersWithin = 0x03,    // s
  All = 0x04,                // range pre-query marker
};

struct FriendThreshold {
  std::string id;
  std::uint32_t df = 0;

  friend bool operator==(const FriendThreshold&, const FriendThreshold&) = default;
};

/// Shared body of Registration and Update. pk_plain accompanies the message
/// so the social server can verify this and subsequent signatures; the copy
/// under enc_pk stays opaque to it.
struct Enrollment {
  std::string id;
  HybridCiphertext enc_loc;
  HybridCiphertext enc_pk;
  RsaPublicKey pk_plain;
  std::vector<FriendThreshold> friends;
  std::uint32_t ds = 0;
  std::int64_t ts_ms = 0;
  Signature sig;

  friend bool operator==(const Enrollment&, const Enrollment&) = default;
};

struct Registration : Enrollment {
  friend bool operator==(const Registration&, const Registration&) = default;
};
struct Update : Enrollment {
  friend bool operator==(const Update&, const Update&) = default;
};

struct StoreRecord {
  PseudoIdentity pid;
  HybridCiphertext enc_loc;
  HybridCiphertext enc_pk;
  std::int64_t tl_ms = 0;

  friend bool operator==(const StoreRecord&, const StoreRecord&) = default;
};

struct QueryParticularFriends {
  std::string id;
  HybridCiphertext enc_loc;
  std::vector<std::string> targets;

  friend bool operator==(const QueryParticularFriends&, const QueryParticularFriends&) = default;
};

struct QueryFriendsWithin {
  std::string id;
  HybridCiphertext enc_loc;
  std::uint32_t l = 0;

  friend bool operator==(const QueryFriendsWithin&, const QueryFriendsWithin&) = default;
};

struct QueryStrangersWithin {
  std::string id;
  HybridCiphertext enc_loc;
  std::uint32_t l = 0;

  friend bool operator==(const QueryStrangersWithin&, const QueryStrangersWithin&) = default;
};

struct SubsetDispatch {
  PseudoIdentity requester;
  HybridCiphertext enc_loc;
  QueryType qtype = QueryType::ParticularFriends;
  std::uint32_t ls_index = 0;
  std::vector<PseudoIdentity> subset;
  std::vector<paillier::Ciphertext> threshold_cts;  // aligned with subset
  paillier::PublicKey pk_m;
  std::optional<std::uint32_t> l;

  friend bool operator==(const SubsetDispatch& a, const SubsetDispatch& b) {
    return a.requester == b.requester && a.enc_loc == b.enc_loc && a.qtype == b.qtype &&
           a.ls_index == b.ls_index && a.subset == b.subset && a.threshold_cts == b.threshold_cts &&
           a.pk_m.n == b.pk_m.n && a.pk_m.g == b.pk_m.g && a.l == b.l;
  }
};

struct RangePreQuery {
  PseudoIdentity requester;
  std::uint32_t l = 0;

  friend bool operator==(const RangePreQuery&, const RangePreQuery&) = default;
};

struct RangePreResult {
  std::vector<PseudoIdentity> pids;

  friend bool operator==(const RangePreResult&, const RangePreResult&) = default;
};

/// Skipped entries mark subset members the location server could not (or, for
/// radius-filtered friends, would not) compare; they carry no batch.
struct BatchEntry {
  PseudoIdentity pid;
  bool skipped = false;
  distcmp::ComparisonBatch batch;

  friend bool operator==(const BatchEntry& a, const BatchEntry& b) {
    return a.pid == b.pid && a.skipped == b.skipped && a.batch.items == b.batch.items;
  }
};

struct ComparisonBatchMsg {
  std::vector<BatchEntry> entries;

  friend bool operator==(const ComparisonBatchMsg&, const ComparisonBatchMsg&) = default;
};

struct Verdict {
  PseudoIdentity pid;
  bool within = false;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct VerdictMsg {
  std::vector<Verdict> verdicts;

  friend bool operator==(const VerdictMsg&, const VerdictMsg&) = default;
};

struct LocationResult {
  PseudoIdentity pid;
  HybridCiphertext enc_loc;

  friend bool operator==(const LocationResult&, const LocationResult&) = default;
};

struct LocationResultMsg {
  std::vector<LocationResult> items;

  friend bool operator==(const LocationResultMsg&, const LocationResultMsg&) = default;
};

struct ReplyItem {
  std::string label;
  HybridCiphertext enc_loc;

  friend bool operator==(const ReplyItem&, const ReplyItem&) = default;
};

struct ReplyToVehicle {
  std::vector<ReplyItem> items;

  friend bool operator==(const ReplyToVehicle&, const ReplyToVehicle&) = default;
};

struct Ack {
  friend bool operator==(const Ack&, const Ack&) = default;
};

struct ErrorMsg {
  std::uint8_t code = 0;
  std::string detail;

  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

using Message = std::variant<Registration, Update, StoreRecord, QueryParticularFriends,
                             QueryFriendsWithin, QueryStrangersWithin, SubsetDispatch, RangePreQuery,
                             RangePreResult, ComparisonBatchMsg, VerdictMsg, LocationResultMsg,
                             ReplyToVehicle, Ack, ErrorMsg>;

MsgTag tag_of(const Message& msg);

std::vector<std::uint8_t> encode(const Message& msg);

/// Strict decode: bad magic, version, length, tag or trailing bytes raise
/// MalformedFrame / UnknownTag.
Message decode(std::span<const std::uint8_t> frame);

}  // namespace ppls::wire
