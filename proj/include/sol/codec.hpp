#pragma once

#include "sol/bytes.hpp"
#include "sol/types.hpp"

namespace sol {

// Payload signed by a certificate issuer: length-prefixed subject key
// bytes, issuer fingerprint and issue time, in that order.
Bytes certificate_signing_payload(BytesView subject_encoded, const Fingerprint& issuer_fp,
                                  uint64_t issued_at);

// Payload signed by a device over an application sub-key.
Bytes subkey_signing_payload(BytesView subkey_encoded, std::string_view app_tag,
                             uint64_t issued_at);

// Wire/persistence encodings. Deterministic; decode throws
// MalformedEncoding on truncation or bad magic.
Bytes encode_certificate(const Certificate& cert);
Certificate decode_certificate(BytesView data);

Bytes encode_subkey_certificate(const SubKeyCertificate& skc);
SubKeyCertificate decode_subkey_certificate(BytesView data);

// Persisted byte footprint of an item, i.e. the length of its Base64 file.
size_t persisted_size(const PublicKeyBytes& key);
size_t persisted_size(const Certificate& cert);
size_t persisted_size(const SubKeyCertificate& skc);

}  // namespace sol
