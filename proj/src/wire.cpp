#include "ppls/wire.hpp"

#include <cstring>

#include "ppls/error.hpp"

namespace ppls::wire {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    buf_.push_back(std::uint8_t(v >> 24));
    buf_.push_back(std::uint8_t(v >> 16));
    buf_.push_back(std::uint8_t(v >> 8));
    buf_.push_back(std::uint8_t(v));
  }
  void i64(std::int64_t v) {
    auto u = static_cast<std::uint64_t>(v);
    for (int i = 56; i >= 0; i -= 8) buf_.push_back(std::uint8_t(u >> i));
  }
  void raw(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  void bytes(std::span<const std::uint8_t> b) {
    u32(static_cast<std::uint32_t>(b.size()));
    raw(b);
  }
  void str(const std::string& s) { bytes({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}); }
  void bn(const Bn& v) { bytes(v.to_bytes_be()); }
  void pid(const PseudoIdentity& p) { str(p.hex()); }
  void hybrid(const HybridCiphertext& h) {
    bytes(h.wrapped_key);
    raw(h.nonce);
    bytes(h.body);
  }
  void rsa_pub(const RsaPublicKey& k) {
    bn(k.n);
    bn(k.e);
  }
  void paillier_pub(const paillier::PublicKey& k) {
    bn(k.n);
    bn(k.g);
  }
  void paillier_ct(const paillier::Ciphertext& c) { bn(c.value); }

  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  std::uint8_t u8() {
    need(1);
    return b_[off_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = (std::uint32_t(b_[off_]) << 24) | (std::uint32_t(b_[off_ + 1]) << 16) |
                      (std::uint32_t(b_[off_ + 2]) << 8) | b_[off_ + 3];
    off_ += 4;
    return v;
  }
  std::int64_t i64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | b_[off_ + i];
    off_ += 8;
    return static_cast<std::int64_t>(v);
  }
  std::span<const std::uint8_t> raw(std::size_t len) {
    need(len);
    auto s = b_.subspan(off_, len);
    off_ += len;
    return s;
  }
  std::vector<std::uint8_t> bytes() {
    auto s = raw(u32());
    return {s.begin(), s.end()};
  }
  std::string str() {
    auto s = raw(u32());
    return {reinterpret_cast<const char*>(s.data()), s.size()};
  }
  Bn bn() { return Bn::from_bytes_be(raw(u32())); }
  PseudoIdentity pid() {
    auto p = PseudoIdentity::from_hex(str());
    if (!p) fail(Err::MalformedFrame, "bad pseudo-identity encoding");
    return *p;
  }
  HybridCiphertext hybrid() {
    HybridCiphertext h;
    h.wrapped_key = bytes();
    auto n = raw(12);
    std::copy(n.begin(), n.end(), h.nonce.begin());
    h.body = bytes();
    return h;
  }
  RsaPublicKey rsa_pub() {
    RsaPublicKey k;
    k.n = bn();
    k.e = bn();
    return k;
  }
  paillier::PublicKey paillier_pub() {
    paillier::PublicKey k;
    k.n = bn();
    k.g = bn();
    k.n2 = k.n * k.n;
    return k;
  }
  paillier::Ciphertext paillier_ct() { return paillier::Ciphertext{bn()}; }

  std::uint32_t count() {
    std::uint32_t c = u32();
    // Every counted element occupies at least one byte; reject absurd counts
    // before reserving memory for them.
    if (c > remaining()) fail(Err::MalformedFrame, "count exceeds body");
    return c;
  }

  std::size_t remaining() const { return b_.size() - off_; }
  void expect_end() const {
    if (off_ != b_.size()) fail(Err::MalformedFrame, "trailing bytes in body");
  }

 private:
  void need(std::size_t n) const {
    if (off_ + n > b_.size()) fail(Err::MalformedFrame, "truncated body");
  }

  std::span<const std::uint8_t> b_;
  std::size_t off_ = 0;
};

void write_enrollment(Writer& w, const Enrollment& e) {
  w.str(e.id);
  w.hybrid(e.enc_loc);
  w.hybrid(e.enc_pk);
  w.rsa_pub(e.pk_plain);
  w.u32(static_cast<std::uint32_t>(e.friends.size()));
  for (const auto& f : e.friends) {
    w.str(f.id);
    w.u32(f.df);
  }
  w.u32(e.ds);
  w.i64(e.ts_ms);
  w.bn(e.sig.value);
}

void read_enrollment(Reader& r, Enrollment& e) {
  e.id = r.str();
  e.enc_loc = r.hybrid();
  e.enc_pk = r.hybrid();
  e.pk_plain = r.rsa_pub();
  std::uint32_t nf = r.count();
  e.friends.reserve(nf);
  for (std::uint32_t i = 0; i < nf; ++i) {
    FriendThreshold ft;
    ft.id = r.str();
    ft.df = r.u32();
    e.friends.push_back(std::move(ft));
  }
  e.ds = r.u32();
  e.ts_ms = r.i64();
  e.sig.value = r.bn();
}

QueryType read_qtype(Reader& r, QueryType expected) {
  auto v = static_cast<QueryType>(r.u8());
  if (v != expected) fail(Err::MalformedFrame, "unexpected request-type byte");
  return v;
}

struct BodyWriter {
  Writer w;

  void operator()(const Registration& m) { write_enrollment(w, m); }
  void operator()(const Update& m) { write_enrollment(w, m); }
  void operator()(const StoreRecord& m) {
    w.pid(m.pid);
    w.hybrid(m.enc_loc);
    w.hybrid(m.enc_pk);
    w.i64(m.tl_ms);
  }
  void operator()(const QueryParticularFriends& m) {
    w.str(m.id);
    w.hybrid(m.enc_loc);
    w.u8(static_cast<std::uint8_t>(QueryType::ParticularFriends));
    w.u32(static_cast<std::uint32_t>(m.targets.size()));
    for (const auto& t : m.targets) w.str(t);
  }
  void operator()(const QueryFriendsWithin& m) {
    w.str(m.id);
    w.hybrid(m.enc_loc);
    w.u8(static_cast<std::uint8_t>(QueryType::FriendsWithin));
    w.u32(m.l);
  }
  void operator()(const QueryStrangersWithin& m) {
    w.str(m.id);
    w.hybrid(m.enc_loc);
    w.u8(static_cast<std::uint8_t>(QueryType::StrangersWithin));
    w.u32(m.l);
  }
  void operator()(const SubsetDispatch& m) {
    w.pid(m.requester);
    w.hybrid(m.enc_loc);
    w.u8(static_cast<std::uint8_t>(m.qtype));
    w.u32(m.ls_index);
    w.u32(static_cast<std::uint32_t>(m.subset.size()));
    for (const auto& p : m.subset) w.pid(p);
    w.u32(static_cast<std::uint32_t>(m.threshold_cts.size()));
    for (const auto& c : m.threshold_cts) w.paillier_ct(c);
    w.paillier_pub(m.pk_m);
    w.u8(m.l.has_value() ? 1 : 0);
    if (m.l) w.u32(*m.l);
  }
  void operator()(const RangePreQuery& m) {
    w.pid(m.requester);
    w.u8(static_cast<std::uint8_t>(QueryType::All));
    w.u32(m.l);
  }
  void operator()(const RangePreResult& m) {
    w.u32(static_cast<std::uint32_t>(m.pids.size()));
    for (const auto& p : m.pids) w.pid(p);
  }
  void operator()(const ComparisonBatchMsg& m) {
    w.u32(static_cast<std::uint32_t>(m.entries.size()));
    for (const auto& e : m.entries) {
      w.pid(e.pid);
      w.u8(e.skipped ? 1 : 0);
      w.u32(static_cast<std::uint32_t>(e.batch.items.size()));
      for (const auto& c : e.batch.items) w.paillier_ct(c);
    }
  }
  void operator()(const VerdictMsg& m) {
    w.u32(static_cast<std::uint32_t>(m.verdicts.size()));
    for (const auto& v : m.verdicts) {
      w.pid(v.pid);
      w.u8(v.within ? 1 : 0);
    }
  }
  void operator()(const LocationResultMsg& m) {
    w.u32(static_cast<std::uint32_t>(m.items.size()));
    for (const auto& it : m.items) {
      w.pid(it.pid);
      w.hybrid(it.enc_loc);
    }
  }
  void operator()(const ReplyToVehicle& m) {
    w.u32(static_cast<std::uint32_t>(m.items.size()));
    for (const auto& it : m.items) {
      w.str(it.label);
      w.hybrid(it.enc_loc);
    }
  }
  void operator()(const Ack&) { w.u8(0); }
  void operator()(const ErrorMsg& m) {
    w.u8(m.code);
    w.str(m.detail);
  }
};

Message decode_body(MsgTag tag, Reader& r) {
  switch (tag) {
    case MsgTag::Registration: {
      Registration m;
      read_enrollment(r, m);
      return m;
    }
    case MsgTag::Update: {
      Update m;
      read_enrollment(r, m);
      return m;
    }
    case MsgTag::StoreRecord: {
      StoreRecord m;
      m.pid = r.pid();
      m.enc_loc = r.hybrid();
      m.enc_pk = r.hybrid();
      m.tl_ms = r.i64();
      return m;
    }
    case MsgTag::QueryParticularFriends: {
      QueryParticularFriends m;
      m.id = r.str();
      m.enc_loc = r.hybrid();
      read_qtype(r, QueryType::ParticularFriends);
      std::uint32_t n = r.count();
      m.targets.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) m.targets.push_back(r.str());
      return m;
    }
    case MsgTag::QueryFriendsWithin: {
      QueryFriendsWithin m;
      m.id = r.str();
      m.enc_loc = r.hybrid();
      read_qtype(r, QueryType::FriendsWithin);
      m.l = r.u32();
      return m;
    }
    case MsgTag::QueryStrangersWithin: {
      QueryStrangersWithin m;
      m.id = r.str();
      m.enc_loc = r.hybrid();
      read_qtype(r, QueryType::StrangersWithin);
      m.l = r.u32();
      return m;
    }
    case MsgTag::SubsetDispatch: {
      SubsetDispatch m;
      m.requester = r.pid();
      m.enc_loc = r.hybrid();
      auto q = static_cast<QueryType>(r.u8());
      if (q != QueryType::ParticularFriends && q != QueryType::FriendsWithin &&
          q != QueryType::StrangersWithin)
        fail(Err::MalformedFrame, "bad dispatch request type");
      m.qtype = q;
      m.ls_index = r.u32();
      std::uint32_t n = r.count();
      m.subset.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) m.subset.push_back(r.pid());
      std::uint32_t nc = r.count();
      if (nc != n) fail(Err::MalformedFrame, "threshold count does not match subset");
      m.threshold_cts.reserve(nc);
      for (std::uint32_t i = 0; i < nc; ++i) m.threshold_cts.push_back(r.paillier_ct());
      m.pk_m = r.paillier_pub();
      if (r.u8() != 0) m.l = r.u32();
      return m;
    }
    case MsgTag::RangePreQuery: {
      RangePreQuery m;
      m.requester = r.pid();
      read_qtype(r, QueryType::All);
      m.l = r.u32();
      return m;
    }
    case MsgTag::RangePreResult: {
      RangePreResult m;
      std::uint32_t n = r.count();
      m.pids.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) m.pids.push_back(r.pid());
      return m;
    }
    case MsgTag::ComparisonBatch: {
      ComparisonBatchMsg m;
      std::uint32_t n = r.count();
      m.entries.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) {
        BatchEntry e;
        e.pid = r.pid();
        e.skipped = r.u8() != 0;
        std::uint32_t k = r.count();
        e.batch.items.reserve(k);
        for (std::uint32_t j = 0; j < k; ++j) e.batch.items.push_back(r.paillier_ct());
        m.entries.push_back(std::move(e));
      }
      return m;
    }
    case MsgTag::Verdicts: {
      VerdictMsg m;
      std::uint32_t n = r.count();
      m.verdicts.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) {
        Verdict v;
        v.pid = r.pid();
        v.within = r.u8() != 0;
        m.verdicts.push_back(v);
      }
      return m;
    }
    case MsgTag::LocationResult: {
      LocationResultMsg m;
      std::uint32_t n = r.count();
      m.items.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) {
        LocationResult it;
        it.pid = r.pid();
        it.enc_loc = r.hybrid();
        m.items.push_back(std::move(it));
      }
      return m;
    }
    case MsgTag::ReplyToVehicle: {
      ReplyToVehicle m;
      std::uint32_t n = r.count();
      m.items.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) {
        ReplyItem it;
        it.label = r.str();
        it.enc_loc = r.hybrid();
        m.items.push_back(std::move(it));
      }
      return m;
    }
    case MsgTag::Ack: {
      if (r.u8() != 0) fail(Err::MalformedFrame, "bad ack code");
      return Ack{};
    }
    case MsgTag::Error: {
      ErrorMsg m;
      m.code = r.u8();
      m.detail = r.str();
      return m;
    }
  }
  fail(Err::UnknownTag, "unrecognized message tag");
}

}  // namespace

MsgTag tag_of(const Message& msg) {
  return static_cast<MsgTag>(msg.index() + 1);
}

const char* tag_name(MsgTag tag) {
  switch (tag) {
    case MsgTag::Registration: return "Registration";
    case MsgTag::Update: return "Update";
    case MsgTag::StoreRecord: return "StoreRecord";
    case MsgTag::QueryParticularFriends: return "QueryParticularFriends";
    case MsgTag::QueryFriendsWithin: return "QueryFriendsWithin";
    case MsgTag::QueryStrangersWithin: return "QueryStrangersWithin";
    case MsgTag::SubsetDispatch: return "SubsetDispatch";
    case MsgTag::RangePreQuery: return "RangePreQuery";
    case MsgTag::RangePreResult: return "RangePreResult";
    case MsgTag::ComparisonBatch: return "ComparisonBatch";
    case MsgTag::Verdicts: return "Verdicts";
    case MsgTag::LocationResult: return "LocationResult";
    case MsgTag::ReplyToVehicle: return "ReplyToVehicle";
    case MsgTag::Ack: return "Ack";
    case MsgTag::Error: return "Error";
  }
  return "Unknown";
}

std::vector<std::uint8_t> encode(const Message& msg) {
  BodyWriter bw;
  std::visit(bw, msg);
  auto body = bw.w.take();

  std::vector<std::uint8_t> frame;
  frame.reserve(body.size() + 10);
  frame.push_back('P');
  frame.push_back('P');
  frame.push_back('L');
  frame.push_back('S');
  frame.push_back(kWireVersion);
  frame.push_back(static_cast<std::uint8_t>(tag_of(msg)));
  std::uint32_t len = static_cast<std::uint32_t>(body.size());
  frame.push_back(std::uint8_t(len >> 24));
  frame.push_back(std::uint8_t(len >> 16));
  frame.push_back(std::uint8_t(len >> 8));
  frame.push_back(std::uint8_t(len));
  frame.insert(frame.end(), body.begin(), body.end());
  return frame;
}

Message decode(std::span<const std::uint8_t> frame) {
  if (frame.size() < 10) fail(Err::MalformedFrame, "frame shorter than header");
  if (std::memcmp(frame.data(), "PPLS", 4) != 0) fail(Err::MalformedFrame, "bad magic");
  if (frame[4] != kWireVersion) fail(Err::MalformedFrame, "unsupported version");
  std::uint8_t tag = frame[5];
  std::uint32_t len = (std::uint32_t(frame[6]) << 24) | (std::uint32_t(frame[7]) << 16) |
                      (std::uint32_t(frame[8]) << 8) | frame[9];
  if (frame.size() != std::size_t(10) + len) fail(Err::MalformedFrame, "length mismatch");
  if (tag < 0x01 || tag > 0x0F) fail(Err::UnknownTag, "unrecognized message tag");
  Reader r(frame.subspan(10));
  Message m = decode_body(static_cast<MsgTag>(tag), r);
  r.expect_end();
  return m;
}

}  // namespace ppls::wire
