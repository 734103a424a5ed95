#pragma once

#include <stdexcept>
#include <string>

namespace sol {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// core-model
struct EncodingTooShort : Error { using Error::Error; };
struct MalformedEncoding : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };

// keystore
struct UnsupportedAlgorithm : Error { using Error::Error; };
struct WrongPin : Error { using Error::Error; };
struct StoreLocked : Error { using Error::Error; };
struct StoreCorrupt : Error { using Error::Error; };
struct SelfCertificateRejected : Error { using Error::Error; };
struct SubkeyLimitReached : Error { using Error::Error; };

// trust-graph
struct CorruptRepository : Error { using Error::Error; };

// protocol
struct OoBRejected : Error { using Error::Error; };
struct ProtocolViolation : Error { using Error::Error; };
struct NoPriorRelationship : Error { using Error::Error; };

// simulator / cli
struct IoError : Error { using Error::Error; };
struct MissingCalibration : Error { using Error::Error; };

struct CryptoError : Error { using Error::Error; };

}  // namespace sol
