#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "sol/bytes.hpp"

namespace sol {

enum class Algorithm : uint8_t {
    Rsa2048 = 0x01,
    EcdsaP256 = 0x02,
};

std::string_view algorithm_name(Algorithm a);
Algorithm algorithm_from_name(std::string_view name);

// Canonical public key bytes: one algorithm tag byte followed by the DER
// SubjectPublicKeyInfo body. The tagged form is what gets hashed, suffixed
// for key IDs, transferred and persisted.
class PublicKeyBytes {
public:
    PublicKeyBytes() = default;
    PublicKeyBytes(Algorithm algorithm, Bytes der_body);

    // Parse the tagged canonical form back into a key. Throws
    // MalformedEncoding on unknown tag or EncodingTooShort when the
    // encoding is too short to carry a key ID.
    static PublicKeyBytes from_encoded(BytesView encoded);

    Algorithm algorithm() const { return algorithm_; }
    const Bytes& encoded() const { return encoded_; }  // tag + DER body
    BytesView der_body() const { return BytesView(encoded_).subspan(1); }

    bool operator==(const PublicKeyBytes&) const = default;
    auto operator<=>(const PublicKeyBytes&) const = default;

private:
    Algorithm algorithm_ = Algorithm::EcdsaP256;
    Bytes encoded_;
};

struct Fingerprint {
    std::array<uint8_t, 32> digest{};

    std::string hex() const;
    static Fingerprint from_hex(std::string_view hex);

    bool operator==(const Fingerprint&) const = default;
    auto operator<=>(const Fingerprint&) const = default;
};

struct KeyId {
    std::array<uint8_t, 8> id{};

    std::string hex() const;

    bool operator==(const KeyId&) const = default;
    auto operator<=>(const KeyId&) const = default;
};

// Total order: Ultimate > Trusted > Known > Unknown.
enum class TrustLevel : uint8_t {
    Unknown = 0,
    Known = 1,
    Trusted = 2,
    Ultimate = 3,
};

std::string_view trust_level_name(TrustLevel level);

inline std::strong_ordering operator<=>(TrustLevel a, TrustLevel b) {
    return static_cast<uint8_t>(a) <=> static_cast<uint8_t>(b);
}

// Issuer-signed binding over a subject public key. The signature covers
// the canonical payload (subject key bytes, issuer fingerprint, issue
// time); the subject key itself travels separately.
struct Certificate {
    Fingerprint issuer_fp;
    Fingerprint subject_fp;
    KeyId subject_keyid;
    uint64_t issued_at = 0;  // unix seconds (simulated clock in tests/sims)
    Bytes sig;

    bool operator==(const Certificate&) const = default;
};

constexpr size_t kMaxAppTagBytes = 64;

struct SubKeyCertificate {
    Fingerprint device_fp;  // issuing device's authentication key
    PublicKeyBytes subkey;
    std::string app_tag;  // UTF-8, <= 64 bytes
    uint64_t issued_at = 0;
    Bytes sig;

    bool operator==(const SubKeyCertificate&) const = default;
};

struct TrustConfig {
    uint32_t maxdegree = 3;
    uint32_t numknown = 1;
    uint32_t maxsubkeys = 3;
    Algorithm signaturealgorithm = Algorithm::EcdsaP256;

    // Throws InvalidConfig when a bound is violated (maxdegree or
    // numknown of zero).
    void validate() const;
};

}  // namespace sol
