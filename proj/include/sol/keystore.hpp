#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "sol/crypto.hpp"
#include "sol/types.hpp"

typedef struct evp_pkey_st EVP_PKEY;

namespace sol {

namespace detail {
struct EvpPkeyDeleter {
    void operator()(EVP_PKEY* p) const;
};
}  // namespace detail

using EvpPkeyPtr = std::unique_ptr<EVP_PKEY, detail::EvpPkeyDeleter>;

// Freshly generated key pair. The private half stays behind an opaque
// handle; it is either moved into a keystore or kept in application
// memory (sub-keys).
class DeviceKeyPair {
public:
    DeviceKeyPair(PublicKeyBytes pub, EvpPkeyPtr priv);

    const PublicKeyBytes& public_key() const { return public_key_; }
    EVP_PKEY* handle() const { return private_key_.get(); }
    EvpPkeyPtr release() { return std::move(private_key_); }

private:
    PublicKeyBytes public_key_;
    EvpPkeyPtr private_key_;
};

// When a seed is given the pair is derived deterministically from it;
// otherwise the system entropy source is used.
DeviceKeyPair generate_keypair(Algorithm algorithm, std::optional<uint64_t> seed = std::nullopt);

// SHA-256-based signing over canonical payloads. The private key may
// be any supported algorithm; ECDSA nonces are derived deterministically
// from (key, digest) so signatures are reproducible.
Bytes sign_payload(EVP_PKEY* key, BytesView payload, CryptoCounters* counters);

// Total verification: any malformed input yields false.
bool verify_payload(const PublicKeyBytes& key, BytesView payload, BytesView sig);
// Same, against an already-loaded key (skips the DER parse).
bool verify_with_key(EVP_PKEY* key, BytesView payload, BytesView sig);

class RealVerifier : public Verifier {
public:
    explicit RealVerifier(CryptoCounters* counters = nullptr) : counters_(counters) {}
    bool verify(const PublicKeyBytes& key, BytesView payload, BytesView sig) const override;

private:
    CryptoCounters* counters_;
};

// In-memory signing identity around a generated key pair; what the
// simulator's real crypto mode and protocol tests use, no store file.
class KeyPairIdentity : public SigningIdentity {
public:
    explicit KeyPairIdentity(DeviceKeyPair pair, CryptoCounters* counters = nullptr)
        : pair_(std::move(pair)), counters_(counters) {}

    const PublicKeyBytes& public_key() const override { return pair_.public_key(); }
    Bytes sign(BytesView payload) override { return sign_payload(pair_.handle(), payload, counters_); }

private:
    DeviceKeyPair pair_;
    CryptoCounters* counters_;
};

// PIN-locked on-disk store for the device authentication key. At rest the
// private key is sealed with AES-256-GCM under a PBKDF2-derived key; the
// GCM tag doubles as the wrong-PIN detector. The whole record is Base64
// on disk.
class SoftwareKeystore : public SigningIdentity {
public:
    struct KdfParams {
        uint32_t iterations = 100000;
        Bytes salt;  // 16 bytes
    };

    // Generates a fresh authentication key, seals it under `pin` and
    // writes the store file. The returned store is Unlocked.
    static SoftwareKeystore create(const std::filesystem::path& path, const std::string& pin,
                                   Algorithm algorithm,
                                   std::optional<uint64_t> seed = std::nullopt,
                                   uint32_t kdf_iterations = 100000);

    // Loads the header (public key, params). The store starts Locked.
    static SoftwareKeystore open(const std::filesystem::path& path);

    SoftwareKeystore(SoftwareKeystore&&) = default;
    SoftwareKeystore& operator=(SoftwareKeystore&&) = default;

    bool unlocked() const { return private_key_ != nullptr; }
    void lock();
    // Throws WrongPin on a bad PIN (state stays Locked), StoreCorrupt if
    // the sealed blob cannot be parsed after authentication.
    void unlock(const std::string& pin);

    const PublicKeyBytes& public_key() const override { return public_key_; }
    Algorithm algorithm() const { return public_key_.algorithm(); }

    // Throws StoreLocked while locked.
    Bytes sign(BytesView payload) override;
    Certificate issue_certificate(const PublicKeyBytes& subject, uint64_t now);
    // Counts lifetime issuances; throws SubkeyLimitReached at maxsubkeys.
    SubKeyCertificate register_subkey(const PublicKeyBytes& subkey_public, std::string app_tag,
                                      uint64_t now, uint32_t maxsubkeys);

    uint32_t issued_subkeys() const { return issued_subkeys_; }
    const std::filesystem::path& path() const { return path_; }

    void set_counters(CryptoCounters* counters) { counters_ = counters; }

    // Raw sealed blob as stored on disk (header + ciphertext), for
    // inspection in tests.
    const Bytes& sealed_record() const { return record_; }

private:
    SoftwareKeystore() = default;
    void seal_and_write();
    void parse_record();

    std::filesystem::path path_;
    PublicKeyBytes public_key_;
    KdfParams kdf_;
    uint64_t write_counter_ = 0;
    uint32_t issued_subkeys_ = 0;
    Bytes record_;      // full store file contents (binary, pre-Base64)
    Bytes sealed_;      // ciphertext portion
    EvpPkeyPtr private_key_;
    Bytes cached_pin_key_;  // KDF output while unlocked, for re-sealing
    CryptoCounters* counters_ = nullptr;
};

}  // namespace sol
