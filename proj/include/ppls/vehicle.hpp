#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ppls/asym.hpp"
#include "ppls/coord.hpp"
#include "ppls/rng.hpp"
#include "ppls/wire.hpp"

namespace ppls {

/// Vehicle role: key lifecycle, enrollment and query construction, response
/// decryption. One instance per vehicle, single-threaded.
class VehicleClient {
 public:
  VehicleClient(std::string id, Coord loc, std::map<std::string, std::uint32_t> friend_df,
                std::uint32_t ds, RsaPublicKey ls_pk, unsigned rsa_bits, std::uint64_t seed);

  wire::Registration build_registration(std::int64_t now);
  /// Rotates the keypair, then builds the message: the signature still uses
  /// the outgoing key (the one the server has on file), while both key fields
  /// carry the fresh one.
  wire::Update build_update(std::int64_t now);

  wire::QueryParticularFriends query_particular_friends(std::vector<std::string> targets);
  wire::QueryFriendsWithin query_friends_within(std::uint32_t l);
  wire::QueryStrangersWithin query_strangers_within(std::uint32_t l);

  /// Decrypts every reply item it can; items under a stale key are dropped.
  std::vector<std::pair<std::string, Coord>> decrypt_response(const wire::ReplyToVehicle& reply);

  void set_location(Coord loc) { loc_ = loc; }
  Coord location() const { return loc_; }
  const std::string& id() const { return id_; }
  const RsaKeypair& keypair() const { return keypair_; }
  void set_thresholds(std::map<std::string, std::uint32_t> friend_df, std::uint32_t ds) {
    friend_df_ = std::move(friend_df);
    ds_ = ds;
  }

 private:
  void fill_enrollment(wire::Enrollment& msg, const RsaKeypair& signing_key, std::int64_t now);

  std::string id_;
  Coord loc_;
  std::map<std::string, std::uint32_t> friend_df_;
  std::uint32_t ds_;
  RsaPublicKey ls_pk_;
  unsigned rsa_bits_;
  Rng rng_;
  RsaKeypair keypair_;
};

}  // namespace ppls
