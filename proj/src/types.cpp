#include "sol/types.hpp"

#include <algorithm>

#include "sol/errors.hpp"

namespace sol {

std::string_view algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::Rsa2048: return "rsa2048";
        case Algorithm::EcdsaP256: return "ecdsa_p256";
    }
    throw UnsupportedAlgorithm("unknown algorithm tag");
}

Algorithm algorithm_from_name(std::string_view name) {
    if (name == "rsa2048" || name == "rsa" || name == "RSA2048") return Algorithm::Rsa2048;
    if (name == "ecdsa_p256" || name == "ecdsa" || name == "ECDSA_P256") return Algorithm::EcdsaP256;
    throw UnsupportedAlgorithm("unknown algorithm: " + std::string(name));
}

PublicKeyBytes::PublicKeyBytes(Algorithm algorithm, Bytes der_body) : algorithm_(algorithm) {
    encoded_.reserve(der_body.size() + 1);
    encoded_.push_back(static_cast<uint8_t>(algorithm));
    encoded_.insert(encoded_.end(), der_body.begin(), der_body.end());
    if (encoded_.size() <= 8) throw EncodingTooShort("public key encoding must exceed 8 bytes");
}

PublicKeyBytes PublicKeyBytes::from_encoded(BytesView encoded) {
    if (encoded.empty()) throw MalformedEncoding("empty public key encoding");
    uint8_t tag = encoded[0];
    if (tag != static_cast<uint8_t>(Algorithm::Rsa2048) &&
        tag != static_cast<uint8_t>(Algorithm::EcdsaP256))
        throw MalformedEncoding("unknown public key algorithm tag");
    if (encoded.size() <= 8) throw EncodingTooShort("public key encoding must exceed 8 bytes");
    PublicKeyBytes key;
    key.algorithm_ = static_cast<Algorithm>(tag);
    key.encoded_.assign(encoded.begin(), encoded.end());
    return key;
}

std::string Fingerprint::hex() const {
    return hex_encode(digest);
}

Fingerprint Fingerprint::from_hex(std::string_view hex) {
    Bytes raw = hex_decode(hex);
    if (raw.size() != 32) throw MalformedEncoding("fingerprint must be 32 bytes");
    Fingerprint fp;
    std::copy(raw.begin(), raw.end(), fp.digest.begin());
    return fp;
}

std::string KeyId::hex() const {
    return hex_encode(id);
}

std::string_view trust_level_name(TrustLevel level) {
    switch (level) {
        case TrustLevel::Unknown: return "unknown";
        case TrustLevel::Known: return "known";
        case TrustLevel::Trusted: return "trusted";
        case TrustLevel::Ultimate: return "ultimate";
    }
    return "unknown";
}

void TrustConfig::validate() const {
    if (maxdegree < 1) throw InvalidConfig("maxdegree must be >= 1");
    if (numknown < 1) throw InvalidConfig("numknown must be >= 1");
}

}  // namespace sol
