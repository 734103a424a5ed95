#include "sol/codec.hpp"

#include <algorithm>

#include "sol/errors.hpp"

namespace sol {

namespace {
constexpr uint8_t kCertMagic = 'C';
constexpr uint8_t kSubkeyMagic = 'K';
constexpr uint8_t kVersion = 0x01;
// Length prefixes in persisted/wire items are bounded to keep decoders
// from allocating on hostile input. Largest legitimate field is an RSA
// SubjectPublicKeyInfo (~300 bytes).
constexpr size_t kMaxFieldLen = 64 * 1024;

Fingerprint read_fp(ByteReader& r) {
    Bytes raw = r.raw(32);
    Fingerprint fp;
    std::copy(raw.begin(), raw.end(), fp.digest.begin());
    return fp;
}
}  // namespace

Bytes certificate_signing_payload(BytesView subject_encoded, const Fingerprint& issuer_fp,
                                  uint64_t issued_at) {
    ByteWriter w;
    w.prefixed(subject_encoded);
    w.prefixed(issuer_fp.digest);
    ByteWriter ts;
    ts.u64(issued_at);
    w.prefixed(ts.bytes());
    return w.take();
}

Bytes subkey_signing_payload(BytesView subkey_encoded, std::string_view app_tag,
                             uint64_t issued_at) {
    ByteWriter w;
    w.prefixed(subkey_encoded);
    w.prefixed(BytesView(reinterpret_cast<const uint8_t*>(app_tag.data()), app_tag.size()));
    ByteWriter ts;
    ts.u64(issued_at);
    w.prefixed(ts.bytes());
    return w.take();
}

Bytes encode_certificate(const Certificate& cert) {
    ByteWriter w;
    w.u8(kCertMagic);
    w.u8(kVersion);
    w.raw(cert.issuer_fp.digest);
    w.raw(cert.subject_fp.digest);
    w.raw(cert.subject_keyid.id);
    w.u64(cert.issued_at);
    w.prefixed(cert.sig);
    return w.take();
}

Certificate decode_certificate(BytesView data) {
    ByteReader r(data);
    if (r.u8() != kCertMagic || r.u8() != kVersion)
        throw MalformedEncoding("bad certificate magic");
    Certificate cert;
    cert.issuer_fp = read_fp(r);
    cert.subject_fp = read_fp(r);
    Bytes keyid = r.raw(8);
    std::copy(keyid.begin(), keyid.end(), cert.subject_keyid.id.begin());
    cert.issued_at = r.u64();
    cert.sig = r.prefixed(kMaxFieldLen);
    if (!r.done()) throw MalformedEncoding("trailing bytes after certificate");
    return cert;
}

Bytes encode_subkey_certificate(const SubKeyCertificate& skc) {
    ByteWriter w;
    w.u8(kSubkeyMagic);
    w.u8(kVersion);
    w.raw(skc.device_fp.digest);
    w.prefixed(skc.subkey.encoded());
    w.prefixed(BytesView(reinterpret_cast<const uint8_t*>(skc.app_tag.data()),
                         skc.app_tag.size()));
    w.u64(skc.issued_at);
    w.prefixed(skc.sig);
    return w.take();
}

SubKeyCertificate decode_subkey_certificate(BytesView data) {
    ByteReader r(data);
    if (r.u8() != kSubkeyMagic || r.u8() != kVersion)
        throw MalformedEncoding("bad sub-key certificate magic");
    SubKeyCertificate skc;
    skc.device_fp = read_fp(r);
    skc.subkey = PublicKeyBytes::from_encoded(r.prefixed(kMaxFieldLen));
    Bytes tag = r.prefixed(kMaxAppTagBytes);
    skc.app_tag.assign(tag.begin(), tag.end());
    skc.issued_at = r.u64();
    skc.sig = r.prefixed(kMaxFieldLen);
    if (!r.done()) throw MalformedEncoding("trailing bytes after sub-key certificate");
    return skc;
}

size_t persisted_size(const PublicKeyBytes& key) {
    return base64_length(key.encoded().size());
}

size_t persisted_size(const Certificate& cert) {
    return base64_length(encode_certificate(cert).size());
}

size_t persisted_size(const SubKeyCertificate& skc) {
    // A sub-key occupies two files: the key itself and its certificate.
    return base64_length(skc.subkey.encoded().size()) +
           base64_length(encode_subkey_certificate(skc).size());
}

}  // namespace sol
