#include "sol/protocol.hpp"

#include <algorithm>

#include "sol/codec.hpp"
#include "sol/errors.hpp"

namespace sol {

std::string_view handshake_phase_name(HandshakePhase p) {
    switch (p) {
        case HandshakePhase::Idle: return "idle";
        case HandshakePhase::SentKey: return "sent_key";
        case HandshakePhase::AwaitOoB: return "await_oob";
        case HandshakePhase::AwaitCert: return "await_cert";
        case HandshakePhase::Done: return "done";
        case HandshakePhase::Failed: return "failed";
    }
    return "failed";
}

HandshakeSession::HandshakeSession(NodeContext ctx, const OoBVerifier& oob, uint64_t now)
    : ctx_(ctx), oob_(oob), now_(now) {}

void HandshakeSession::fail(const std::string& why) {
    phase_ = HandshakePhase::Failed;
    throw ProtocolViolation(why);
}

Message HandshakeSession::start() {
    if (phase_ != HandshakePhase::Idle) fail("start() outside Idle");
    phase_ = HandshakePhase::SentKey;
    return KeyOffer{ctx_.fingerprint(), ctx_.identity.public_key()};
}

void HandshakeSession::on_key_offer(const Message& m) {
    if (phase_ != HandshakePhase::SentKey) fail("KEY_OFFER out of order");
    const auto* offer = std::get_if<KeyOffer>(&m);
    if (!offer) fail("expected KEY_OFFER");
    if (fingerprint(offer->sender_key) != offer->sender_fp)
        fail("KEY_OFFER fingerprint does not match key");
    if (offer->sender_fp == ctx_.fingerprint()) fail("peer offered our own key");
    peer_key_ = offer->sender_key;
    peer_fp_ = offer->sender_fp;
    phase_ = HandshakePhase::AwaitOoB;
}

Message HandshakeSession::confirm_oob(const Fingerprint& presented) {
    if (phase_ != HandshakePhase::AwaitOoB) fail("OoB confirmation out of order");
    if (!oob_.verify(ctx_.fingerprint(), presented, *peer_fp_)) {
        phase_ = HandshakePhase::Failed;
        throw OoBRejected("out-of-band fingerprint verification failed");
    }
    issued_cert_ = make_certificate(ctx_.identity, *peer_key_, now_);
    phase_ = HandshakePhase::AwaitCert;
    return CertExchange{*issued_cert_};
}

void HandshakeSession::on_certificate(const Message& m) {
    if (phase_ != HandshakePhase::AwaitCert) fail("CERT_EXCHANGE out of order");
    const auto* exchange = std::get_if<CertExchange>(&m);
    if (!exchange) fail("expected CERT_EXCHANGE");
    const Certificate& received = exchange->certificate;
    if (received.subject_fp != ctx_.fingerprint()) fail("peer certificate not over our key");
    if (received.issuer_fp != *peer_fp_) fail("peer certificate issued by a third party");

    std::vector<MergeItem> items{*peer_key_, *issued_cert_, received};
    MergeReport report = ctx_.repo.merge(items);
    if (report.rejected_count(RejectReason::InvalidSignature) > 0)
        fail("peer certificate signature invalid");
    phase_ = HandshakePhase::Done;
}

HandshakeOutcome handshake_run(NodeContext a, NodeContext b, const OoBVerifier& oob,
                               uint64_t now) {
    HandshakeSession sa(a, oob, now);
    HandshakeSession sb(b, oob, now);
    HandshakeOutcome out;

    Message offer_a = sa.start();
    Message offer_b = sb.start();
    out.bytes_a_to_b += encoded_size(offer_a);
    out.bytes_b_to_a += encoded_size(offer_b);
    sa.on_key_offer(offer_b);
    sb.on_key_offer(offer_a);

    // Out-of-band: each side reads the fingerprint the true peer presents.
    Message cert_a = sa.confirm_oob(b.fingerprint());
    Message cert_b = sb.confirm_oob(a.fingerprint());
    out.bytes_a_to_b += encoded_size(cert_a);
    out.bytes_b_to_a += encoded_size(cert_b);
    sa.on_certificate(cert_b);
    sb.on_certificate(cert_a);

    out.success = sa.phase() == HandshakePhase::Done && sb.phase() == HandshakePhase::Done;
    return out;
}

SyncQuery sync_build_query(const TrustRepository& repo) {
    // The known set covers every fingerprint the repository holds:
    // devices and registered sub-keys alike. The responder uses it to
    // compute what the requester provably lacks.
    SyncQuery query;
    for (const auto& [fp, rec] : repo.records()) {
        query.known_fps.push_back(fp);
        for (const auto& [skfp, skc] : rec.subkey_certs) query.known_fps.push_back(skfp);
    }
    std::sort(query.known_fps.begin(), query.known_fps.end());
    query.known_fps.erase(std::unique(query.known_fps.begin(), query.known_fps.end()),
                          query.known_fps.end());
    return query;
}

SyncResponse sync_build_response(const TrustRepository& repo, const SyncQuery& query) {
    std::vector<Fingerprint> known = query.known_fps;
    std::sort(known.begin(), known.end());
    auto listed = [&](const Fingerprint& fp) {
        return std::binary_search(known.begin(), known.end(), fp);
    };

    SyncResponse response;
    for (const auto& [fp, rec] : repo.records()) {
        SyncRecord out;
        out.subject_key = rec.key;
        if (!listed(fp)) {
            // Unknown subject: ship the whole record.
            for (const auto& [issuer, cert] : rec.certificates) out.certificates.push_back(cert);
            for (const auto& [skfp, skc] : rec.subkey_certs) out.subkey_certs.push_back(skc);
        } else {
            // Known subject: only material the requester cannot hold yet.
            // A stored certificate implies its issuer key is stored, so a
            // certificate from an unlisted issuer is necessarily new; the
            // same goes for sub-key certificates by their fingerprint.
            for (const auto& [issuer, cert] : rec.certificates)
                if (!listed(issuer)) out.certificates.push_back(cert);
            for (const auto& [skfp, skc] : rec.subkey_certs)
                if (!listed(skfp)) out.subkey_certs.push_back(skc);
            if (out.certificates.empty() && out.subkey_certs.empty()) continue;
        }
        response.records.push_back(std::move(out));
    }
    return response;
}

std::vector<MergeItem> sync_items(const SyncResponse& response) {
    std::vector<MergeItem> items;
    for (const SyncRecord& rec : response.records) items.emplace_back(rec.subject_key);
    for (const SyncRecord& rec : response.records)
        for (const Certificate& cert : rec.certificates) items.emplace_back(cert);
    for (const SyncRecord& rec : response.records)
        for (const SubKeyCertificate& skc : rec.subkey_certs) items.emplace_back(skc);
    return items;
}

SyncOutcome sync_run(NodeContext requester, NodeContext responder, uint64_t) {
    TrustAssessment req_view = requester.repo.evaluate();
    TrustAssessment resp_view = responder.repo.evaluate();
    if (req_view.level(responder.fingerprint()) != TrustLevel::Trusted ||
        resp_view.level(requester.fingerprint()) != TrustLevel::Trusted)
        throw NoPriorRelationship("synchronization requires a completed handshake");

    SyncQuery query = sync_build_query(requester.repo);
    SyncResponse response = sync_build_response(responder.repo, query);

    SyncOutcome out;
    out.query_bytes = encoded_size(Message(query));
    out.response_bytes = encoded_size(Message(response));
    out.report = requester.repo.merge(sync_items(response));
    out.items_merged = out.report.accepted;
    return out;
}

}  // namespace sol
