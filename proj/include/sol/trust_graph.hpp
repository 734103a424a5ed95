#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sol/crypto.hpp"
#include "sol/types.hpp"

namespace sol {

// Everything a repository knows about one device, keyed by the device's
// fingerprint: its key, certificates over it (one per issuer, newest
// wins) and sub-key certificates it issued (keyed by sub-key
// fingerprint).
struct SubjectRecord {
    PublicKeyBytes key;
    std::map<Fingerprint, Certificate> certificates;       // by issuer_fp
    std::map<Fingerprint, SubKeyCertificate> subkey_certs;  // by fingerprint(subkey)
};

struct TrustAssessment {
    struct Entry {
        TrustLevel level = TrustLevel::Unknown;
        uint32_t depth = UINT32_MAX;  // owner = 0, direct = 1
    };
    std::map<Fingerprint, Entry> entries;

    TrustLevel level(const Fingerprint& fp) const;
    uint32_t depth(const Fingerprint& fp) const;
};

enum class RejectReason {
    MissingKey,
    InvalidSignature,
    Unreachable,
    Obsolete,
    SelfCertificate,
    Malformed,
    BufferFull,
};

std::string_view reject_reason_name(RejectReason r);

struct MergeReport {
    size_t accepted = 0;
    size_t duplicates = 0;
    std::map<RejectReason, size_t> rejected;

    size_t rejected_total() const;
    size_t rejected_count(RejectReason r) const;
};

using MergeItem = std::variant<PublicKeyBytes, Certificate, SubKeyCertificate>;

struct LoadReport;

// A device's local trust repository. Single-writer; evaluation is pure.
// Certificates are verified before they are stored, and material that
// cannot contribute within maxdegree is rejected so repository growth
// stays bounded by the configured degree.
class TrustRepository {
public:
    TrustRepository(PublicKeyBytes owner_key, TrustConfig config, const Verifier* verifier);

    const Fingerprint& owner_fp() const { return owner_fp_; }
    const PublicKeyBytes& owner_key() const { return owner_key_; }
    const TrustConfig& config() const { return config_; }
    const std::map<Fingerprint, SubjectRecord>& records() const { return records_; }
    const SubjectRecord* find(const Fingerprint& fp) const;

    // Least fixed point of the trust rules:
    //   owner -> Ultimate(0); directly owner-certified -> Trusted(1);
    //   certified by a Trusted device -> Known(2) when maxdegree >= 2;
    //   certified by >= numknown Known devices -> Known at
    //   min(issuer depth)+1 when that stays within maxdegree.
    TrustAssessment evaluate() const;

    MergeReport merge(const std::vector<MergeItem>& incoming);

    // Optional cap on repo_size_bytes(); merges reject items that would
    // exceed it (RejectReason::BufferFull).
    void set_size_cap(uint64_t cap_bytes) { size_cap_ = cap_bytes; }

    // Persisted footprint in bytes (sum of the Base64 record files),
    // tracked incrementally; no disk access.
    uint64_t size_bytes() const { return size_bytes_; }

    // Directory-per-subject layout named by hex fingerprints, Base64
    // files inside; see README for the exact layout.
    void persist(const std::filesystem::path& root_dir) const;
    static LoadReport load(const std::filesystem::path& root_dir, TrustConfig config,
                           const Verifier* verifier);
    // Reads the trust configuration recorded in a persisted repository's
    // repo.meta. Throws CorruptRepository when absent or unreadable.
    static TrustConfig read_config(const std::filesystem::path& root_dir);

private:
    struct CertDecision;
    bool verify_certificate(const Certificate& cert, const PublicKeyBytes& subject_key) const;
    bool verify_subkey_certificate(const SubKeyCertificate& skc) const;

    Fingerprint owner_fp_;
    PublicKeyBytes owner_key_;
    TrustConfig config_;
    const Verifier* verifier_;
    std::map<Fingerprint, SubjectRecord> records_;
    uint64_t size_bytes_ = 0;
    std::optional<uint64_t> size_cap_;
};

struct LoadReport {
    TrustRepository repo;
    std::vector<std::string> warnings;  // dropped items, one line each
};

// True when the two certificates bind the same issuer/subject pair and
// `candidate` should replace `incumbent` (newer issued_at wins, ties to
// the lexicographically smaller signature).
bool certificate_supersedes(const Certificate& candidate, const Certificate& incumbent);

}  // namespace sol
