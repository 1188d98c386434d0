#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ppls {

enum class Err : std::uint8_t {
  Internal = 0,
  PlaintextOutOfRange,
  MalformedCiphertext,
  ThresholdOutOfRange,
  EmptyIdentity,
  DecryptionFailure,
  BadSignature,
  StaleTimestamp,
  UnknownVehicle,
  UnknownRequester,
  UnknownTarget,
  RadiusOutOfRange,
  MalformedFrame,
  UnknownTag,
  PeerClosed,
  Timeout,
  ConfigInvalid,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& what)
      : std::runtime_error(std::string(err_name(code)) + ": " + what), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& what) { throw Error(code, what); }

}  // namespace ppls
