#include "sol/crypto.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstring>

#include "sol/codec.hpp"
#include "sol/errors.hpp"

namespace sol {

Bytes sha256(BytesView data) {
    Bytes digest(32);
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != 32)
        throw CryptoError("SHA-256 failed");
    return digest;
}

Fingerprint fingerprint_of(BytesView encoded) {
    Bytes digest = sha256(encoded);
    Fingerprint fp;
    std::copy(digest.begin(), digest.end(), fp.digest.begin());
    return fp;
}

Fingerprint fingerprint(const PublicKeyBytes& key) {
    return fingerprint_of(key.encoded());
}

KeyId key_id(const PublicKeyBytes& key) {
    const Bytes& enc = key.encoded();
    if (enc.size() < 8) throw EncodingTooShort("encoding shorter than 8 bytes");
    KeyId id;
    std::copy(enc.end() - 8, enc.end(), id.id.begin());
    return id;
}

DigestStream::DigestStream(BytesView seed) : seed_(seed.begin(), seed.end()) {}

void DigestStream::fill(uint8_t* out, size_t n) {
    while (n > 0) {
        if (offset_ == block_.size()) {
            Bytes input = seed_;
            for (int shift = 56; shift >= 0; shift -= 8)
                input.push_back(static_cast<uint8_t>(counter_ >> shift));
            block_ = sha256(input);
            counter_++;
            offset_ = 0;
        }
        size_t take = std::min(n, block_.size() - offset_);
        std::memcpy(out, block_.data() + offset_, take);
        offset_ += take;
        out += take;
        n -= take;
    }
}

Bytes DigestStream::take(size_t n) {
    Bytes out(n);
    fill(out.data(), n);
    return out;
}

Certificate make_certificate(SigningIdentity& issuer, const PublicKeyBytes& subject, uint64_t now) {
    Fingerprint issuer_fp = issuer.fingerprint();
    Fingerprint subject_fp = fingerprint(subject);
    if (issuer_fp == subject_fp)
        throw SelfCertificateRejected("refusing to certify own key");
    Certificate cert;
    cert.issuer_fp = issuer_fp;
    cert.subject_fp = subject_fp;
    cert.subject_keyid = key_id(subject);
    cert.issued_at = now;
    cert.sig = issuer.sign(certificate_signing_payload(subject.encoded(), issuer_fp, now));
    return cert;
}

SubKeyCertificate make_subkey_certificate(SigningIdentity& device, const PublicKeyBytes& subkey,
                                          std::string app_tag, uint64_t now) {
    if (app_tag.size() > kMaxAppTagBytes)
        throw MalformedEncoding("app tag exceeds 64 bytes");
    SubKeyCertificate skc;
    skc.device_fp = device.fingerprint();
    skc.subkey = subkey;
    skc.app_tag = std::move(app_tag);
    skc.issued_at = now;
    skc.sig = device.sign(subkey_signing_payload(subkey.encoded(), skc.app_tag, now));
    return skc;
}

}  // namespace sol
