#include "ppls/vehicle.hpp"

#include "ppls/error.hpp"

namespace ppls {

namespace {

std::vector<std::uint8_t> signed_payload(const std::string& id, std::int64_t ts_ms) {
  std::vector<std::uint8_t> m(id.begin(), id.end());
  auto u = static_cast<std::uint64_t>(ts_ms);
  for (int i = 56; i >= 0; i -= 8) m.push_back(std::uint8_t(u >> i));
  return m;
}

}  // namespace

VehicleClient::VehicleClient(std::string id, Coord loc,
                             std::map<std::string, std::uint32_t> friend_df, std::uint32_t ds,
                             RsaPublicKey ls_pk, unsigned rsa_bits, std::uint64_t seed)
    : id_(std::move(id)),
      loc_(loc),
      friend_df_(std::move(friend_df)),
      ds_(ds),
      ls_pk_(std::move(ls_pk)),
      rsa_bits_(rsa_bits),
      rng_(seed),
      keypair_(asym_keygen(rsa_bits, rng_)) {
  if (loc_.x >= kCoordLimit || loc_.y >= kCoordLimit)
    fail(Err::ConfigInvalid, "vehicle location outside the coordinate plane");
}

void VehicleClient::fill_enrollment(wire::Enrollment& msg, const RsaKeypair& signing_key,
                                    std::int64_t now) {
  msg.id = id_;
  msg.enc_loc = asym_encrypt(ls_pk_, coord_bytes(loc_), rng_);
  msg.enc_pk = asym_encrypt(ls_pk_, rsa_pub_to_bytes(keypair_.pub), rng_);
  msg.pk_plain = keypair_.pub;
  for (const auto& [fid, df] : friend_df_) msg.friends.push_back({fid, df});
  msg.ds = ds_;
  msg.ts_ms = now;
  msg.sig = sign(signing_key, signed_payload(id_, now));
}

wire::Registration VehicleClient::build_registration(std::int64_t now) {
  wire::Registration msg;
  fill_enrollment(msg, keypair_, now);
  return msg;
}

wire::Update VehicleClient::build_update(std::int64_t now) {
  RsaKeypair outgoing = keypair_;
  keypair_ = asym_keygen(rsa_bits_, rng_);
  wire::Update msg;
  fill_enrollment(msg, outgoing, now);
  return msg;
}

wire::QueryParticularFriends VehicleClient::query_particular_friends(
    std::vector<std::string> targets) {
  wire::QueryParticularFriends q;
  q.id = id_;
  q.enc_loc = asym_encrypt(ls_pk_, coord_bytes(loc_), rng_);
  q.targets = std::move(targets);
  return q;
}

wire::QueryFriendsWithin VehicleClient::query_friends_within(std::uint32_t l) {
  if (l < 1) fail(Err::RadiusOutOfRange, "l must be at least 1");
  wire::QueryFriendsWithin q;
  q.id = id_;
  q.enc_loc = asym_encrypt(ls_pk_, coord_bytes(loc_), rng_);
  q.l = l;
  return q;
}

wire::QueryStrangersWithin VehicleClient::query_strangers_within(std::uint32_t l) {
  if (l < 1) fail(Err::RadiusOutOfRange, "l must be at least 1");
  wire::QueryStrangersWithin q;
  q.id = id_;
  q.enc_loc = asym_encrypt(ls_pk_, coord_bytes(loc_), rng_);
  q.l = l;
  return q;
}

std::vector<std::pair<std::string, Coord>> VehicleClient::decrypt_response(
    const wire::ReplyToVehicle& reply) {
  std::vector<std::pair<std::string, Coord>> out;
  for (const auto& item : reply.items) {
    try {
      out.emplace_back(item.label, parse_coord(asym_decrypt(keypair_, item.enc_loc)));
    } catch (const Error&) {
      // stale key or corrupted item: drop it, keep the rest
    }
  }
  return out;
}

}  // namespace ppls
