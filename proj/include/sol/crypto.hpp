#pragma once

#include <cstdint>

#include "sol/bytes.hpp"
#include "sol/types.hpp"

namespace sol {

Bytes sha256(BytesView data);

// SHA-256 of the canonical (algorithm-tagged) key encoding.
Fingerprint fingerprint(const PublicKeyBytes& key);
Fingerprint fingerprint_of(BytesView encoded);

// Trailing 8 bytes of the canonical encoding. Throws EncodingTooShort
// when the encoding has fewer than 8 bytes.
KeyId key_id(const PublicKeyBytes& key);

// Deterministic byte stream: block i is SHA-256(seed || be64(i)).
// Backs seeded key generation, deterministic nonces and placeholder
// material; not a general-purpose CSPRNG.
class DigestStream {
public:
    explicit DigestStream(BytesView seed);
    void fill(uint8_t* out, size_t n);
    Bytes take(size_t n);

private:
    Bytes seed_;
    Bytes block_;
    uint64_t counter_ = 0;
    size_t offset_ = 0;
};

// Tallies of actual signing/verification calls. Shared by real and
// size-model providers so operation counts stay mode-independent.
struct CryptoCounters {
    uint64_t sign_ops = 0;
    uint64_t verify_ops = 0;
};

// Signature check interface. Implementations must be total: malformed
// keys or signatures return false, never throw.
class Verifier {
public:
    virtual ~Verifier() = default;
    virtual bool verify(const PublicKeyBytes& key, BytesView payload, BytesView sig) const = 0;
};

// A device's signing capability as seen by the protocol layer: the real
// keystore implements it with OpenSSL keys, the simulator's size model
// with calibrated placeholders.
class SigningIdentity {
public:
    virtual ~SigningIdentity() = default;
    virtual const PublicKeyBytes& public_key() const = 0;
    virtual Bytes sign(BytesView payload) = 0;

    Fingerprint fingerprint() const { return sol::fingerprint(public_key()); }
};

// Shared issuance paths so real and placeholder identities produce
// byte-compatible certificates.
Certificate make_certificate(SigningIdentity& issuer, const PublicKeyBytes& subject, uint64_t now);
SubKeyCertificate make_subkey_certificate(SigningIdentity& device, const PublicKeyBytes& subkey,
                                          std::string app_tag, uint64_t now);

}  // namespace sol
