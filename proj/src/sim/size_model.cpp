#include "sol/sim/size_model.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "sol/errors.hpp"
#include "sol/keystore.hpp"

namespace sol::sim {

const Calibration::Entry& Calibration::entry(Algorithm a) const {
    return a == Algorithm::Rsa2048 ? rsa2048 : ecdsa_p256;
}

Calibration Calibration::measure() {
    Calibration calib;
    Bytes probe = to_bytes("calibration probe payload");
    for (Algorithm algo : {Algorithm::Rsa2048, Algorithm::EcdsaP256}) {
        DeviceKeyPair pair = generate_keypair(algo, 0xca11b7a7e5eedull);
        Bytes sig = sign_payload(pair.handle(), probe, nullptr);
        Entry e{pair.public_key().encoded().size(), sig.size()};
        (algo == Algorithm::Rsa2048 ? calib.rsa2048 : calib.ecdsa_p256) = e;
    }
    return calib;
}

void Calibration::save(const std::filesystem::path& path) const {
    std::filesystem::path parent = path.parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write calibration file: " + path.string());
    out << "rsa2048.pubkey_len=" << rsa2048.pubkey_len << "\n"
        << "rsa2048.sig_len=" << rsa2048.sig_len << "\n"
        << "ecdsa_p256.pubkey_len=" << ecdsa_p256.pubkey_len << "\n"
        << "ecdsa_p256.sig_len=" << ecdsa_p256.sig_len << "\n";
    if (!out) throw IoError("short write to calibration file: " + path.string());
}

Calibration Calibration::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingCalibration("calibration file not found: " + path.string());
    std::map<std::string, size_t> values;
    std::string line;
    while (std::getline(in, line)) {
        size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        values[line.substr(0, eq)] = std::stoull(line.substr(eq + 1));
    }
    Calibration calib;
    auto require = [&](const std::string& key) {
        auto it = values.find(key);
        if (it == values.end() || it->second == 0)
            throw MissingCalibration("calibration file misses " + key);
        return it->second;
    };
    calib.rsa2048.pubkey_len = require("rsa2048.pubkey_len");
    calib.rsa2048.sig_len = require("rsa2048.sig_len");
    calib.ecdsa_p256.pubkey_len = require("ecdsa_p256.pubkey_len");
    calib.ecdsa_p256.sig_len = require("ecdsa_p256.sig_len");
    return calib;
}

PublicKeyBytes placeholder_public_key(uint64_t seed, Algorithm algorithm,
                                      const Calibration& calib) {
    Bytes seed_bytes = to_bytes("sol-placeholder-key-v1:");
    for (int shift = 56; shift >= 0; shift -= 8)
        seed_bytes.push_back(static_cast<uint8_t>(seed >> shift));
    size_t body_len = calib.entry(algorithm).pubkey_len - 1;
    return PublicKeyBytes(algorithm, DigestStream(seed_bytes).take(body_len));
}

Bytes placeholder_signature(const PublicKeyBytes& signer, BytesView payload, size_t sig_len) {
    Bytes seed = to_bytes("sol-placeholder-sig-v1:");
    Bytes key_digest = sha256(signer.encoded());
    Bytes payload_digest = sha256(payload);
    seed.insert(seed.end(), key_digest.begin(), key_digest.end());
    seed.insert(seed.end(), payload_digest.begin(), payload_digest.end());
    return DigestStream(seed).take(sig_len);
}

PlaceholderIdentity::PlaceholderIdentity(uint64_t seed, Algorithm algorithm,
                                         const Calibration& calib, CryptoCounters* counters)
    : public_key_(placeholder_public_key(seed, algorithm, calib)),
      sig_len_(calib.entry(algorithm).sig_len),
      counters_(counters) {}

Bytes PlaceholderIdentity::sign(BytesView payload) {
    if (counters_) counters_->sign_ops++;
    return placeholder_signature(public_key_, payload, sig_len_);
}

bool PlaceholderVerifier::verify(const PublicKeyBytes& key, BytesView payload,
                                 BytesView sig) const {
    if (counters_) counters_->verify_ops++;
    Bytes expected = placeholder_signature(key, payload, calib_.entry(key.algorithm()).sig_len);
    return sig.size() == expected.size() && std::equal(sig.begin(), sig.end(), expected.begin());
}

}  // namespace sol::sim
