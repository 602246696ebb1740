#pragma once

#include <stdexcept>
#include <string>

namespace tdp {

// Common base so callers can catch anything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// math / encoding
struct DomainError : Error { using Error::Error; };
struct EncodingError : Error { using Error::Error; };
struct NoPositiveRoot : Error { using Error::Error; };

// key issue and registry
struct DuplicateRegistration : Error { using Error::Error; };
struct DegenerateKey : Error { using Error::Error; };
struct UnknownDevice : Error { using Error::Error; };

// pairing protocol
struct AuthFailure : Error { using Error::Error; };
struct NonceMismatch : Error { using Error::Error; };
struct StateError : Error { using Error::Error; };
struct InvalidPeerKey : Error { using Error::Error; };
struct NoCandidates : Error { using Error::Error; };

// trust computation
struct EmptyIntersection : Error { using Error::Error; };
struct EmptyHistory : Error { using Error::Error; };
struct UnknownTaskType : Error { using Error::Error; };

// receipts
struct SessionNotConfirmed : Error { using Error::Error; };
struct InvalidReceipt : Error { using Error::Error; };
struct DuplicateReceipt : Error { using Error::Error; };
struct StaleReceipt : Error { using Error::Error; };

// input files
struct ParseError : Error { using Error::Error; };
struct EmptyTrace : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace tdp
