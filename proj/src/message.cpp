#include "sol/message.hpp"

#include <algorithm>

#include "sol/codec.hpp"
#include "sol/errors.hpp"

namespace sol {

namespace {

constexpr uint8_t kTagKeyOffer = 0x01;
constexpr uint8_t kTagCertExchange = 0x02;
constexpr uint8_t kTagSyncQuery = 0x03;
constexpr uint8_t kTagSyncResponse = 0x04;
constexpr size_t kMaxFieldLen = 64 * 1024;
constexpr uint32_t kMaxListLen = 1 << 20;

Fingerprint read_fp(ByteReader& r) {
    Bytes raw = r.raw(32);
    Fingerprint fp;
    std::copy(raw.begin(), raw.end(), fp.digest.begin());
    return fp;
}

Bytes encode_payload(const KeyOffer& m) {
    ByteWriter w;
    w.raw(m.sender_fp.digest);
    w.prefixed(m.sender_key.encoded());
    return w.take();
}

Bytes encode_payload(const CertExchange& m) {
    return encode_certificate(m.certificate);
}

Bytes encode_payload(const SyncQuery& m) {
    ByteWriter w;
    for (const Fingerprint& fp : m.known_fps) w.raw(fp.digest);
    return w.take();
}

Bytes encode_payload(const SyncResponse& m) {
    ByteWriter w;
    w.u32(static_cast<uint32_t>(m.records.size()));
    for (const SyncRecord& rec : m.records) {
        w.prefixed(rec.subject_key.encoded());
        w.u32(static_cast<uint32_t>(rec.certificates.size()));
        for (const Certificate& cert : rec.certificates) w.prefixed(encode_certificate(cert));
        w.u32(static_cast<uint32_t>(rec.subkey_certs.size()));
        for (const SubKeyCertificate& skc : rec.subkey_certs)
            w.prefixed(encode_subkey_certificate(skc));
    }
    return w.take();
}

Message decode_payload(uint8_t tag, BytesView payload) {
    ByteReader r(payload);
    switch (tag) {
        case kTagKeyOffer: {
            KeyOffer m;
            m.sender_fp = read_fp(r);
            m.sender_key = PublicKeyBytes::from_encoded(r.prefixed(kMaxFieldLen));
            if (!r.done()) throw MalformedEncoding("trailing bytes in KEY_OFFER");
            return m;
        }
        case kTagCertExchange: {
            CertExchange m;
            m.certificate = decode_certificate(payload);
            return m;
        }
        case kTagSyncQuery: {
            if (payload.size() % 32 != 0)
                throw MalformedEncoding("SYNC_QUERY payload not a multiple of 32");
            SyncQuery m;
            m.known_fps.reserve(payload.size() / 32);
            while (!r.done()) m.known_fps.push_back(read_fp(r));
            return m;
        }
        case kTagSyncResponse: {
            SyncResponse m;
            uint32_t n_records = r.u32();
            if (n_records > kMaxListLen) throw MalformedEncoding("record count out of range");
            m.records.reserve(n_records);
            for (uint32_t i = 0; i < n_records; i++) {
                SyncRecord rec;
                rec.subject_key = PublicKeyBytes::from_encoded(r.prefixed(kMaxFieldLen));
                uint32_t n_certs = r.u32();
                if (n_certs > kMaxListLen) throw MalformedEncoding("cert count out of range");
                for (uint32_t j = 0; j < n_certs; j++)
                    rec.certificates.push_back(decode_certificate(r.prefixed(kMaxFieldLen)));
                uint32_t n_skcs = r.u32();
                if (n_skcs > kMaxListLen) throw MalformedEncoding("sub-key count out of range");
                for (uint32_t j = 0; j < n_skcs; j++)
                    rec.subkey_certs.push_back(
                        decode_subkey_certificate(r.prefixed(kMaxFieldLen)));
                m.records.push_back(std::move(rec));
            }
            if (!r.done()) throw MalformedEncoding("trailing bytes in SYNC_RESPONSE");
            return m;
        }
        default:
            throw MalformedEncoding("unknown message tag");
    }
}

uint8_t tag_of(const Message& m) {
    return std::visit(
        [](const auto& v) -> uint8_t {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, KeyOffer>) return kTagKeyOffer;
            if constexpr (std::is_same_v<T, CertExchange>) return kTagCertExchange;
            if constexpr (std::is_same_v<T, SyncQuery>) return kTagSyncQuery;
            if constexpr (std::is_same_v<T, SyncResponse>) return kTagSyncResponse;
        },
        m);
}

}  // namespace

Bytes encode_message(const Message& m) {
    Bytes payload = std::visit([](const auto& v) { return encode_payload(v); }, m);
    ByteWriter w;
    w.u8(kWireVersion);
    w.u8(tag_of(m));
    w.u32(static_cast<uint32_t>(payload.size()));
    w.raw(payload);
    return w.take();
}

Message decode_message(BytesView data) {
    Message out;
    size_t consumed = decode_message_from_stream(data, out);
    if (consumed != data.size()) throw MalformedEncoding("trailing bytes after message");
    return out;
}

size_t decode_message_from_stream(BytesView stream, Message& out) {
    ByteReader r(stream);
    if (r.u8() != kWireVersion) throw MalformedEncoding("unsupported wire version");
    uint8_t tag = r.u8();
    uint32_t len = r.u32();
    Bytes payload = r.raw(len);
    out = decode_payload(tag, payload);
    return kMessageHeaderBytes + len;
}

size_t encoded_size(const Message& m) {
    return encode_message(m).size();
}

}  // namespace sol
