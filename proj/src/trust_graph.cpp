#include "sol/trust_graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sol/codec.hpp"
#include "sol/errors.hpp"

namespace sol {

namespace fs = std::filesystem;

std::string_view reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::MissingKey: return "missing_key";
        case RejectReason::InvalidSignature: return "invalid_signature";
        case RejectReason::Unreachable: return "unreachable";
        case RejectReason::Obsolete: return "obsolete";
        case RejectReason::SelfCertificate: return "self_certificate";
        case RejectReason::Malformed: return "malformed";
        case RejectReason::BufferFull: return "buffer_full";
    }
    return "unknown";
}

TrustLevel TrustAssessment::level(const Fingerprint& fp) const {
    auto it = entries.find(fp);
    return it == entries.end() ? TrustLevel::Unknown : it->second.level;
}

uint32_t TrustAssessment::depth(const Fingerprint& fp) const {
    auto it = entries.find(fp);
    return it == entries.end() ? UINT32_MAX : it->second.depth;
}

size_t MergeReport::rejected_total() const {
    size_t total = 0;
    for (const auto& [reason, count] : rejected) total += count;
    return total;
}

size_t MergeReport::rejected_count(RejectReason r) const {
    auto it = rejected.find(r);
    return it == rejected.end() ? 0 : it->second;
}

bool certificate_supersedes(const Certificate& candidate, const Certificate& incumbent) {
    if (candidate.issued_at != incumbent.issued_at)
        return candidate.issued_at > incumbent.issued_at;
    return candidate.sig < incumbent.sig;
}

namespace {

bool subkey_better(const SubKeyCertificate& a, const SubKeyCertificate& b) {
    if (a.issued_at != b.issued_at) return a.issued_at > b.issued_at;
    if (a.sig != b.sig) return a.sig < b.sig;
    return fingerprint(a.subkey) < fingerprint(b.subkey);
}

}  // namespace

TrustRepository::TrustRepository(PublicKeyBytes owner_key, TrustConfig config,
                                 const Verifier* verifier)
    : owner_fp_(fingerprint(owner_key)),
      owner_key_(std::move(owner_key)),
      config_(config),
      verifier_(verifier) {
    config_.validate();
    SubjectRecord rec;
    rec.key = owner_key_;
    size_bytes_ += persisted_size(owner_key_);
    records_.emplace(owner_fp_, std::move(rec));
}

const SubjectRecord* TrustRepository::find(const Fingerprint& fp) const {
    auto it = records_.find(fp);
    return it == records_.end() ? nullptr : &it->second;
}

bool TrustRepository::verify_certificate(const Certificate& cert,
                                         const PublicKeyBytes& subject_key) const {
    auto issuer = records_.find(cert.issuer_fp);
    if (issuer == records_.end()) return false;
    Bytes payload =
        certificate_signing_payload(subject_key.encoded(), cert.issuer_fp, cert.issued_at);
    return verifier_->verify(issuer->second.key, payload, cert.sig);
}

bool TrustRepository::verify_subkey_certificate(const SubKeyCertificate& skc) const {
    auto device = records_.find(skc.device_fp);
    if (device == records_.end()) return false;
    Bytes payload = subkey_signing_payload(skc.subkey.encoded(), skc.app_tag, skc.issued_at);
    return verifier_->verify(device->second.key, payload, skc.sig);
}

TrustAssessment TrustRepository::evaluate() const {
    TrustAssessment a;
    for (const auto& [fp, rec] : records_) a.entries[fp] = {TrustLevel::Unknown, UINT32_MAX};
    a.entries[owner_fp_] = {TrustLevel::Ultimate, 0};

    for (const auto& [fp, rec] : records_) {
        if (fp == owner_fp_) continue;
        if (rec.certificates.contains(owner_fp_)) a.entries[fp] = {TrustLevel::Trusted, 1};
    }

    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [fp, rec] : records_) {
            if (fp == owner_fp_) continue;
            auto& entry = a.entries[fp];
            if (entry.level == TrustLevel::Trusted) continue;

            uint32_t best = UINT32_MAX;
            uint32_t known_count = 0;
            uint32_t known_min = UINT32_MAX;
            for (const auto& [issuer_fp, cert] : rec.certificates) {
                const auto& issuer = a.entries.at(issuer_fp);
                if (issuer.level == TrustLevel::Trusted) {
                    if (config_.maxdegree >= 2) best = std::min(best, 2u);
                } else if (issuer.level == TrustLevel::Known) {
                    known_count++;
                    known_min = std::min(known_min, issuer.depth + 1);
                }
            }
            if (known_count >= config_.numknown && known_min <= config_.maxdegree)
                best = std::min(best, known_min);

            if (best < entry.depth) {
                entry.level = TrustLevel::Known;
                entry.depth = best;
                changed = true;
            }
        }
    }
    return a;
}

struct TrustRepository::CertDecision {
    Certificate cert;
    bool replaces = false;
};

MergeReport TrustRepository::merge(const std::vector<MergeItem>& incoming) {
    MergeReport report;
    std::vector<Fingerprint> new_keys;

    auto fits_cap = [&](uint64_t delta_add, uint64_t delta_remove) {
        if (!size_cap_.has_value()) return true;
        return size_bytes_ + delta_add <= *size_cap_ + delta_remove;
    };

    // Keys first: certificates in the same batch may depend on them.
    for (const auto& item : incoming) {
        const auto* key = std::get_if<PublicKeyBytes>(&item);
        if (!key) continue;
        if (key->encoded().size() <= 8) {
            report.rejected[RejectReason::Malformed]++;
            continue;
        }
        Fingerprint fp = fingerprint(*key);
        auto it = records_.find(fp);
        if (it != records_.end()) {
            if (it->second.key == *key)
                report.duplicates++;
            else
                report.rejected[RejectReason::Malformed]++;
            continue;
        }
        if (!fits_cap(persisted_size(*key), 0)) {
            report.rejected[RejectReason::BufferFull]++;
            continue;
        }
        SubjectRecord rec;
        rec.key = *key;
        records_.emplace(fp, std::move(rec));
        size_bytes_ += persisted_size(*key);
        new_keys.push_back(fp);
        report.accepted++;
    }

    // Certificate candidates: structural and duplicate filtering before
    // the reachability fixpoint. One best candidate per (subject, issuer)
    // pair keeps the outcome independent of batch order.
    std::map<std::pair<Fingerprint, Fingerprint>, Certificate> candidates;
    for (const auto& item : incoming) {
        const auto* cert = std::get_if<Certificate>(&item);
        if (!cert) continue;
        if (cert->issuer_fp == cert->subject_fp) {
            report.rejected[RejectReason::SelfCertificate]++;
            continue;
        }
        auto subject = records_.find(cert->subject_fp);
        if (subject == records_.end() || !records_.contains(cert->issuer_fp)) {
            report.rejected[RejectReason::MissingKey]++;
            continue;
        }
        auto stored = subject->second.certificates.find(cert->issuer_fp);
        if (stored != subject->second.certificates.end()) {
            if (stored->second == *cert) {
                report.duplicates++;
                continue;
            }
            if (!certificate_supersedes(*cert, stored->second)) {
                report.rejected[RejectReason::Obsolete]++;
                continue;
            }
        }
        auto key = std::make_pair(cert->subject_fp, cert->issuer_fp);
        auto [pos, inserted] = candidates.try_emplace(key, *cert);
        if (!inserted) {
            if (pos->second == *cert) {
                report.duplicates++;
            } else if (certificate_supersedes(*cert, pos->second)) {
                report.rejected[RejectReason::Obsolete]++;
                pos->second = *cert;
            } else {
                report.rejected[RejectReason::Obsolete]++;
            }
        }
    }

    // Accept certificates whose subject stays (or becomes) reachable, or
    // whose issuer sits within maxdegree - 1 so the certificate can count
    // toward a later numknown quorum. Signatures are only verified for
    // certificates that pass this filter.
    bool progress = true;
    while (progress && !candidates.empty()) {
        progress = false;
        TrustAssessment a = evaluate();
        for (auto it = candidates.begin(); it != candidates.end();) {
            const Certificate& cert = it->second;
            auto subject = records_.find(cert.subject_fp);
            const auto issuer_entry = a.entries.at(cert.issuer_fp);

            bool subject_ok = cert.subject_fp == owner_fp_ ||
                              a.level(cert.subject_fp) != TrustLevel::Unknown;
            if (!subject_ok) {
                // Would this certificate alone lift the subject?
                if (issuer_entry.level == TrustLevel::Ultimate) {
                    subject_ok = true;
                } else if (issuer_entry.level == TrustLevel::Trusted && config_.maxdegree >= 2) {
                    subject_ok = true;
                } else if (issuer_entry.level == TrustLevel::Known) {
                    uint32_t count = 1;
                    uint32_t min_depth = issuer_entry.depth + 1;
                    for (const auto& [stored_issuer, stored] : subject->second.certificates) {
                        const auto& e = a.entries.at(stored_issuer);
                        if (e.level == TrustLevel::Known && stored_issuer != cert.issuer_fp) {
                            count++;
                            min_depth = std::min(min_depth, e.depth + 1);
                        }
                    }
                    subject_ok = count >= config_.numknown && min_depth <= config_.maxdegree;
                }
            }
            bool issuer_ok =
                issuer_entry.level == TrustLevel::Ultimate ||
                ((issuer_entry.level == TrustLevel::Trusted ||
                  issuer_entry.level == TrustLevel::Known) &&
                 issuer_entry.depth + 1 <= config_.maxdegree);

            if (!subject_ok && !issuer_ok) {
                ++it;
                continue;
            }

            if (!verify_certificate(cert, subject->second.key)) {
                report.rejected[RejectReason::InvalidSignature]++;
                it = candidates.erase(it);
                continue;
            }
            auto stored = subject->second.certificates.find(cert.issuer_fp);
            uint64_t removed =
                stored == subject->second.certificates.end() ? 0 : persisted_size(stored->second);
            if (!fits_cap(persisted_size(cert), removed)) {
                report.rejected[RejectReason::BufferFull]++;
                it = candidates.erase(it);
                continue;
            }
            size_bytes_ += persisted_size(cert);
            size_bytes_ -= removed;
            subject->second.certificates.insert_or_assign(cert.issuer_fp, cert);
            report.accepted++;
            progress = true;
            it = candidates.erase(it);
        }
    }
    if (!candidates.empty()) report.rejected[RejectReason::Unreachable] += candidates.size();

    auto issues_stored_cert = [&](const Fingerprint& fp) {
        for (const auto& [subject_fp, rec] : records_)
            if (rec.certificates.contains(fp)) return true;
        return false;
    };
    auto retained = [&](const Fingerprint& fp) {
        if (fp == owner_fp_) return true;
        if (std::find(new_keys.begin(), new_keys.end(), fp) == new_keys.end()) return true;
        auto it = records_.find(fp);
        return !it->second.certificates.empty() || issues_stored_cert(fp);
    };

    // Sub-key certificates of devices that did not make it into the web
    // are rejected along with their keys.
    for (const auto& item : incoming) {
        const auto* skc = std::get_if<SubKeyCertificate>(&item);
        if (!skc) continue;
        if (skc->app_tag.size() > kMaxAppTagBytes) {
            report.rejected[RejectReason::Malformed]++;
            continue;
        }
        auto device = records_.find(skc->device_fp);
        if (device == records_.end()) {
            report.rejected[RejectReason::MissingKey]++;
            continue;
        }
        Fingerprint skfp = fingerprint(skc->subkey);
        auto stored = device->second.subkey_certs.find(skfp);
        if (stored != device->second.subkey_certs.end()) {
            if (stored->second == *skc) {
                report.duplicates++;
                continue;
            }
            if (!subkey_better(*skc, stored->second)) {
                report.rejected[RejectReason::Obsolete]++;
                continue;
            }
        }
        if (!retained(skc->device_fp)) {
            report.rejected[RejectReason::Unreachable]++;
            continue;
        }
        if (!verify_subkey_certificate(*skc)) {
            report.rejected[RejectReason::InvalidSignature]++;
            continue;
        }

        uint64_t removed = 0;
        std::optional<Fingerprint> evict;
        if (stored != device->second.subkey_certs.end()) {
            removed = persisted_size(stored->second);
        } else if (device->second.subkey_certs.size() >= config_.maxsubkeys) {
            // Keep the best maxsubkeys entries under a total order so the
            // retained set is independent of merge order.
            const SubKeyCertificate* worst = nullptr;
            for (const auto& [fp, existing] : device->second.subkey_certs)
                if (!worst || subkey_better(*worst, existing)) worst = &existing;
            if (!worst || !subkey_better(*skc, *worst) || config_.maxsubkeys == 0) {
                report.rejected[RejectReason::Obsolete]++;
                continue;
            }
            evict = fingerprint(worst->subkey);
            removed = persisted_size(*worst);
        }
        if (!fits_cap(persisted_size(*skc), removed)) {
            report.rejected[RejectReason::BufferFull]++;
            continue;
        }
        if (evict.has_value()) device->second.subkey_certs.erase(*evict);
        size_bytes_ += persisted_size(*skc);
        size_bytes_ -= removed;
        device->second.subkey_certs.insert_or_assign(skfp, *skc);
        report.accepted++;
    }

    // Drop keys introduced by this batch that ended up referenced by
    // nothing; unreachable material must not accumulate.
    for (const Fingerprint& fp : new_keys) {
        auto it = records_.find(fp);
        if (it == records_.end()) continue;
        if (!it->second.certificates.empty() || !it->second.subkey_certs.empty()) continue;
        if (issues_stored_cert(fp)) continue;
        size_bytes_ -= persisted_size(it->second.key);
        records_.erase(it);
        report.accepted--;
        report.rejected[RejectReason::Unreachable]++;
    }

    return report;
}

namespace {

constexpr char kMetaFile[] = "repo.meta";

bool is_hex64(const std::string& name) {
    if (name.size() != 64) return false;
    for (char c : name)
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    return true;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("short write to " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

void TrustRepository::persist(const fs::path& root_dir) const {
    fs::create_directories(root_dir);

    std::string meta;
    meta += "owner=" + owner_fp_.hex() + "\n";
    meta += "maxdegree=" + std::to_string(config_.maxdegree) + "\n";
    meta += "numknown=" + std::to_string(config_.numknown) + "\n";
    meta += "maxsubkeys=" + std::to_string(config_.maxsubkeys) + "\n";
    meta += "signaturealgorithm=" + std::string(algorithm_name(config_.signaturealgorithm)) + "\n";
    write_file(root_dir / kMetaFile, meta);

    for (const auto& [fp, rec] : records_) {
        fs::path dir = root_dir / fp.hex();
        fs::create_directories(dir);
        std::vector<std::string> expected;
        expected.push_back("pubkey.b64");
        write_file(dir / "pubkey.b64", base64_encode(rec.key.encoded()));
        for (const auto& [issuer_fp, cert] : rec.certificates) {
            std::string name = "cert_" + issuer_fp.hex() + ".b64";
            write_file(dir / name, base64_encode(encode_certificate(cert)));
            expected.push_back(std::move(name));
        }
        for (const auto& [skfp, skc] : rec.subkey_certs) {
            std::string key_name = "subkey_" + skfp.hex() + ".b64";
            std::string cert_name = "subkeycert_" + skfp.hex() + ".b64";
            write_file(dir / key_name, base64_encode(skc.subkey.encoded()));
            write_file(dir / cert_name, base64_encode(encode_subkey_certificate(skc)));
            expected.push_back(std::move(key_name));
            expected.push_back(std::move(cert_name));
        }
        for (const auto& entry : fs::directory_iterator(dir)) {
            std::string name = entry.path().filename().string();
            if (std::find(expected.begin(), expected.end(), name) == expected.end())
                fs::remove(entry.path());
        }
    }
    for (const auto& entry : fs::directory_iterator(root_dir)) {
        if (!entry.is_directory()) continue;
        std::string name = entry.path().filename().string();
        if (is_hex64(name) && !records_.contains(Fingerprint::from_hex(name)))
            fs::remove_all(entry.path());
    }
}

TrustConfig TrustRepository::read_config(const fs::path& root_dir) {
    fs::path meta_path = root_dir / kMetaFile;
    if (!fs::exists(meta_path)) throw CorruptRepository("missing repo.meta in " + root_dir.string());
    TrustConfig config;
    std::istringstream meta(read_file(meta_path));
    try {
        for (std::string line; std::getline(meta, line);) {
            size_t eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(0, eq);
            std::string value = line.substr(eq + 1);
            if (key == "maxdegree") config.maxdegree = static_cast<uint32_t>(std::stoul(value));
            else if (key == "numknown") config.numknown = static_cast<uint32_t>(std::stoul(value));
            else if (key == "maxsubkeys") config.maxsubkeys = static_cast<uint32_t>(std::stoul(value));
            else if (key == "signaturealgorithm") config.signaturealgorithm = algorithm_from_name(value);
        }
        config.validate();
    } catch (const std::exception& e) {
        throw CorruptRepository(std::string("unreadable repo.meta: ") + e.what());
    }
    return config;
}

LoadReport TrustRepository::load(const fs::path& root_dir, TrustConfig config,
                                 const Verifier* verifier) {
    config.validate();
    std::vector<std::string> warnings;

    fs::path meta_path = root_dir / kMetaFile;
    if (!fs::exists(meta_path)) throw CorruptRepository("missing repo.meta in " + root_dir.string());
    std::istringstream meta(read_file(meta_path));
    std::string owner_hex;
    for (std::string line; std::getline(meta, line);) {
        if (line.rfind("owner=", 0) == 0) owner_hex = line.substr(6);
    }
    Fingerprint owner_fp;
    try {
        owner_fp = Fingerprint::from_hex(owner_hex);
    } catch (const Error&) {
        throw CorruptRepository("repo.meta carries no valid owner fingerprint");
    }

    // First pass: subject keys.
    std::map<Fingerprint, PublicKeyBytes> keys;
    std::vector<fs::path> subject_dirs;
    for (const auto& entry : fs::directory_iterator(root_dir)) {
        if (!entry.is_directory()) continue;
        std::string name = entry.path().filename().string();
        if (!is_hex64(name)) continue;
        try {
            Bytes encoded = base64_decode(read_file(entry.path() / "pubkey.b64"));
            PublicKeyBytes key = PublicKeyBytes::from_encoded(encoded);
            if (fingerprint(key).hex() != name) {
                warnings.push_back(name + ": pubkey does not match directory name, record dropped");
                continue;
            }
            keys.emplace(Fingerprint::from_hex(name), std::move(key));
            subject_dirs.push_back(entry.path());
        } catch (const Error& e) {
            warnings.push_back(name + ": unreadable pubkey (" + e.what() + "), record dropped");
        }
    }

    auto owner_it = keys.find(owner_fp);
    if (owner_it == keys.end()) throw CorruptRepository("owner record missing or unreadable");

    TrustRepository repo(owner_it->second, config, verifier);
    for (const auto& [fp, key] : keys) {
        if (fp == owner_fp) continue;
        SubjectRecord rec;
        rec.key = key;
        repo.size_bytes_ += persisted_size(key);
        repo.records_.emplace(fp, std::move(rec));
    }

    // Second pass: certificates and sub-key certificates, re-verified.
    for (const fs::path& dir : subject_dirs) {
        Fingerprint subject_fp = Fingerprint::from_hex(dir.filename().string());
        SubjectRecord& rec = repo.records_.at(subject_fp);
        for (const auto& entry : fs::directory_iterator(dir)) {
            std::string name = entry.path().filename().string();
            std::string label = dir.filename().string().substr(0, 8) + "/" + name;
            try {
                if (name.rfind("cert_", 0) == 0) {
                    Certificate cert = decode_certificate(base64_decode(read_file(entry.path())));
                    if ("cert_" + cert.issuer_fp.hex() + ".b64" != name)
                        throw CorruptRepository("issuer fingerprint does not match filename");
                    if (cert.subject_fp != subject_fp)
                        throw CorruptRepository("certificate subject does not match directory");
                    if (cert.issuer_fp == cert.subject_fp)
                        throw CorruptRepository("self-certificate");
                    if (!repo.records_.contains(cert.issuer_fp))
                        throw CorruptRepository("issuer key not in repository");
                    if (!repo.verify_certificate(cert, rec.key))
                        throw CorruptRepository("signature check failed");
                    repo.size_bytes_ += persisted_size(cert);
                    rec.certificates.insert_or_assign(cert.issuer_fp, cert);
                } else if (name.rfind("subkeycert_", 0) == 0) {
                    SubKeyCertificate skc =
                        decode_subkey_certificate(base64_decode(read_file(entry.path())));
                    if (skc.device_fp != subject_fp)
                        throw CorruptRepository("sub-key device does not match directory");
                    if ("subkeycert_" + fingerprint(skc.subkey).hex() + ".b64" != name)
                        throw CorruptRepository("sub-key fingerprint does not match filename");
                    if (!repo.verify_subkey_certificate(skc))
                        throw CorruptRepository("signature check failed");
                    repo.size_bytes_ += persisted_size(skc);
                    rec.subkey_certs.insert_or_assign(fingerprint(skc.subkey), skc);
                }
            } catch (const Error& e) {
                warnings.push_back(label + ": dropped (" + std::string(e.what()) + ")");
            }
        }
    }

    return LoadReport{std::move(repo), std::move(warnings)};
}

}  // namespace sol
