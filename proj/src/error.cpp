#include "ppls/error.hpp"

namespace ppls {

const char* err_name(Err e) {
  switch (e) {
    case Err::Internal: return "Internal";
    case Err::PlaintextOutOfRange: return "PlaintextOutOfRange";
    case Err::MalformedCiphertext: return "MalformedCiphertext";
    case Err::ThresholdOutOfRange: return "ThresholdOutOfRange";
    case Err::EmptyIdentity: return "EmptyIdentity";
    case Err::DecryptionFailure: return "DecryptionFailure";
    case Err::BadSignature: return "BadSignature";
    case Err::StaleTimestamp: return "StaleTimestamp";
    case Err::UnknownVehicle: return "UnknownVehicle";
    case Err::UnknownRequester: return "UnknownRequester";
    case Err::UnknownTarget: return "UnknownTarget";
    case Err::RadiusOutOfRange: return "RadiusOutOfRange";
    case Err::MalformedFrame: return "MalformedFrame";
    case Err::UnknownTag: return "UnknownTag";
    case Err::PeerClosed: return "PeerClosed";
    case Err::Timeout: return "Timeout";
    case Err::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

}  // namespace ppls
