#pragma once

#include <variant>
#include <vector>

#include "sol/types.hpp"

namespace sol {

// Wire format: 1-byte version, 1-byte type tag, 4-byte big-endian payload
// length, then the payload. Messages are self-delimiting so they can be
// concatenated on one byte stream.
constexpr uint8_t kWireVersion = 0x01;
constexpr size_t kMessageHeaderBytes = 6;

struct KeyOffer {
    Fingerprint sender_fp;
    PublicKeyBytes sender_key;
    bool operator==(const KeyOffer&) const = default;
};

struct CertExchange {
    Certificate certificate;
    bool operator==(const CertExchange&) const = default;
};

struct SyncQuery {
    std::vector<Fingerprint> known_fps;
    bool operator==(const SyncQuery&) const = default;
};

struct SyncRecord {
    PublicKeyBytes subject_key;
    std::vector<Certificate> certificates;
    std::vector<SubKeyCertificate> subkey_certs;
    bool operator==(const SyncRecord&) const = default;
};

struct SyncResponse {
    std::vector<SyncRecord> records;
    bool operator==(const SyncResponse&) const = default;
};

using Message = std::variant<KeyOffer, CertExchange, SyncQuery, SyncResponse>;

Bytes encode_message(const Message& m);
// Throws MalformedEncoding on truncation, bad version or unknown tag.
Message decode_message(BytesView data);

// Parses one length-delimited message from the front of `stream`;
// returns the number of bytes consumed.
size_t decode_message_from_stream(BytesView stream, Message& out);

size_t encoded_size(const Message& m);

}  // namespace sol
