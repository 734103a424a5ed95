#pragma once

#include <filesystem>

#include "sol/crypto.hpp"
#include "sol/types.hpp"

namespace sol::sim {

// Byte lengths of real key/signature material, measured once from the
// real crypto path and reused to size placeholder bytes.
struct Calibration {
    struct Entry {
        size_t pubkey_len = 0;  // canonical (tagged) encoding length
        size_t sig_len = 0;
    };
    Entry rsa2048;
    Entry ecdsa_p256;

    const Entry& entry(Algorithm a) const;

    // Generates seeded key pairs and measures their sizes.
    static Calibration measure();

    void save(const std::filesystem::path& path) const;
    // Throws MissingCalibration when the file is absent or incomplete.
    static Calibration load(const std::filesystem::path& path);
};

// Placeholder key whose bytes are a deterministic function of `seed` with
// the calibrated length. Hashing, fingerprints and key IDs stay real.
PublicKeyBytes placeholder_public_key(uint64_t seed, Algorithm algorithm,
                                      const Calibration& calib);

// Placeholder signature: a keyed digest of (signer key, payload) expanded
// to the calibrated length. Verification recomputes and compares, so
// forged or tampered placeholder material still fails.
Bytes placeholder_signature(const PublicKeyBytes& signer, BytesView payload, size_t sig_len);

class PlaceholderIdentity : public SigningIdentity {
public:
    PlaceholderIdentity(uint64_t seed, Algorithm algorithm, const Calibration& calib,
                        CryptoCounters* counters);

    const PublicKeyBytes& public_key() const override { return public_key_; }
    Bytes sign(BytesView payload) override;

private:
    PublicKeyBytes public_key_;
    size_t sig_len_;
    CryptoCounters* counters_;
};

class PlaceholderVerifier : public Verifier {
public:
    PlaceholderVerifier(const Calibration& calib, CryptoCounters* counters)
        : calib_(calib), counters_(counters) {}
    bool verify(const PublicKeyBytes& key, BytesView payload, BytesView sig) const override;

private:
    Calibration calib_;
    CryptoCounters* counters_;
};

}  // namespace sol::sim
