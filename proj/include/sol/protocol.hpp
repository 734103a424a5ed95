#pragma once

#include <cstdint>
#include <optional>

#include "sol/crypto.hpp"
#include "sol/message.hpp"
#include "sol/trust_graph.hpp"

namespace sol {

// What the protocols need from one endpoint: its signing identity and its
// repository. The caller owns both.
struct NodeContext {
    SigningIdentity& identity;
    TrustRepository& repo;

    Fingerprint fingerprint() const { return identity.fingerprint(); }
};

// Out-of-band fingerprint check: `presented` is what the peer shows over
// the out-of-band channel, `received` is derived from the key that
// arrived in band. The handshake proceeds only on true.
class OoBVerifier {
public:
    virtual ~OoBVerifier() = default;
    virtual bool verify(const Fingerprint& local_fp, const Fingerprint& presented,
                        const Fingerprint& received) const = 0;
};

// Honest comparator: accepts exactly when the in-band key matches the
// out-of-band fingerprint.
class ComparingOoBVerifier : public OoBVerifier {
public:
    bool verify(const Fingerprint&, const Fingerprint& presented,
                const Fingerprint& received) const override {
        return presented == received;
    }
};

enum class HandshakePhase { Idle, SentKey, AwaitOoB, AwaitCert, Done, Failed };

std::string_view handshake_phase_name(HandshakePhase p);

// One endpoint of the mutual bootstrap: key exchange, out-of-band
// verification, certificate exchange, store. Any out-of-order input moves
// the session to Failed and throws ProtocolViolation.
class HandshakeSession {
public:
    HandshakeSession(NodeContext ctx, const OoBVerifier& oob, uint64_t now);

    Message start();                              // Idle -> SentKey, emits KEY_OFFER
    void on_key_offer(const Message& m);          // SentKey -> AwaitOoB
    // Runs the out-of-band check against `presented`; on success issues
    // our certificate over the peer key and emits it. Throws OoBRejected
    // (repos untouched) when the verifier says no.
    Message confirm_oob(const Fingerprint& presented);  // AwaitOoB -> AwaitCert
    // Consumes the peer's certificate over our key, merges peer key and
    // both certificates. AwaitCert -> Done.
    void on_certificate(const Message& m);

    HandshakePhase phase() const { return phase_; }
    const std::optional<PublicKeyBytes>& peer_key() const { return peer_key_; }
    std::optional<Fingerprint> peer_fingerprint() const { return peer_fp_; }

private:
    [[noreturn]] void fail(const std::string& why);

    NodeContext ctx_;
    const OoBVerifier& oob_;
    uint64_t now_;
    HandshakePhase phase_ = HandshakePhase::Idle;
    std::optional<PublicKeyBytes> peer_key_;
    std::optional<Fingerprint> peer_fp_;
    std::optional<Certificate> issued_cert_;
};

struct HandshakeOutcome {
    bool success = false;
    uint64_t bytes_a_to_b = 0;
    uint64_t bytes_b_to_a = 0;
    uint64_t total_bytes() const { return bytes_a_to_b + bytes_b_to_a; }
};

// Drives both sessions in process (tests, simulator). Out-of-band
// fingerprints are taken from the true node identities; byte counts are
// exact encoded message lengths. OoBRejected propagates after both
// sessions observed the refusal.
HandshakeOutcome handshake_run(NodeContext a, NodeContext b, const OoBVerifier& oob,
                               uint64_t now);

struct SyncOutcome {
    uint64_t query_bytes = 0;
    uint64_t response_bytes = 0;
    size_t items_merged = 0;  // accepted by the requester's merge
    MergeReport report;
};

// Requester's announcement: every fingerprint it currently holds.
SyncQuery sync_build_query(const TrustRepository& repo);

// Responder's complement: full records for subjects absent from the query.
SyncResponse sync_build_response(const TrustRepository& repo, const SyncQuery& query);

// Flattens a response into merge items (keys, then certificates, then
// sub-key certificates).
std::vector<MergeItem> sync_items(const SyncResponse& response);

// One unidirectional synchronization. Requires an established
// relationship (mutual Trusted), else throws NoPriorRelationship.
SyncOutcome sync_run(NodeContext requester, NodeContext responder, uint64_t now);

}  // namespace sol
