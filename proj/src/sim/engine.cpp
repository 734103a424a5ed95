#include "sol/sim/engine.hpp"

#include <algorithm>

#include "sol/errors.hpp"
#include "sol/keystore.hpp"
#include "sol/protocol.hpp"
#include "sol/sim/contacts.hpp"

namespace sol::sim {

namespace {
constexpr uint64_t kSampleCadence = 60;
}

Engine::Engine(SimConfig config, Calibration calibration)
    : config_(std::move(config)), calibration_(calibration), num_nodes_(config_.num_nodes) {
    config_.validate();

    if (config_.crypto_mode == CryptoMode::SizeModel)
        verifier_ = std::make_unique<PlaceholderVerifier>(calibration_, &counters_);
    else
        verifier_ = std::make_unique<RealVerifier>(&counters_);

    WorldBounds world{config_.width_m, config_.height_m, config_.speed_min_mps,
                      config_.speed_max_mps};
    Algorithm algo = config_.trust.signaturealgorithm;

    nodes_.reserve(num_nodes_);
    for (uint32_t i = 0; i < num_nodes_; i++) {
        SimNode node;
        uint64_t key_seed = mix_seed(config_.seed, 1, i);
        if (config_.crypto_mode == CryptoMode::SizeModel) {
            node.identity =
                std::make_unique<PlaceholderIdentity>(key_seed, algo, calibration_, &counters_);
        } else {
            node.identity = std::make_unique<KeyPairIdentity>(generate_keypair(algo, key_seed),
                                                              &counters_);
        }
        node.repo = std::make_unique<TrustRepository>(node.identity->public_key(), config_.trust,
                                                      verifier_.get());
        node.repo->set_size_cap(config_.buffer_bytes);
        node.rng = std::mt19937_64(mix_seed(config_.seed, 2, i));
        node.motion = rwp_init(world, node.rng);
        nodes_.push_back(std::move(node));
    }

    // Every node starts with its application sub-keys registered.
    for (uint32_t i = 0; i < num_nodes_; i++) {
        for (uint32_t k = 0; k < config_.trust.maxsubkeys; k++) {
            uint64_t sub_seed = mix_seed(config_.seed, 3, uint64_t(i) << 8 | k);
            PublicKeyBytes sub_pub;
            if (config_.crypto_mode == CryptoMode::SizeModel) {
                sub_pub = placeholder_public_key(sub_seed, algo, calibration_);
            } else {
                sub_pub = generate_keypair(algo, sub_seed).public_key();
            }
            SubKeyCertificate skc = make_subkey_certificate(
                *nodes_[i].identity, sub_pub, "app" + std::to_string(k + 1), 0);
            MergeReport report = nodes_[i].repo->merge({skc});
            buffer_rejections_ += report.rejected_count(RejectReason::BufferFull);
        }
    }

    log_.maxdegree = config_.trust.maxdegree;
    log_.num_nodes = num_nodes_;
}

void Engine::start_handshake(uint32_t i, uint32_t j, double now) {
    NodeContext a{*nodes_[i].identity, *nodes_[i].repo};
    NodeContext b{*nodes_[j].identity, *nodes_[j].repo};
    uint64_t t = static_cast<uint64_t>(now);

    Message offer_a = KeyOffer{a.fingerprint(), a.identity.public_key()};
    Message offer_b = KeyOffer{b.fingerprint(), b.identity.public_key()};
    Certificate cert_ab = make_certificate(a.identity, b.identity.public_key(), t);
    Certificate cert_ba = make_certificate(b.identity, a.identity.public_key(), t);

    Transfer transfer;
    transfer.kind = TransferKind::Handshake;
    transfer.cert_ab = cert_ab;
    transfer.cert_ba = cert_ba;
    transfer.handshake_bytes = encoded_size(offer_a) + encoded_size(offer_b) +
                               encoded_size(Message(CertExchange{cert_ab})) +
                               encoded_size(Message(CertExchange{cert_ba}));
    transfer.completes_at = now + transfer_seconds(transfer.handshake_bytes);
    active_.emplace(pair_key(i, j), std::move(transfer));
}

void Engine::start_sync(uint32_t i, uint32_t j, double now) {
    SyncQuery query_a = sync_build_query(*nodes_[i].repo);
    SyncQuery query_b = sync_build_query(*nodes_[j].repo);
    SyncResponse resp_for_a = sync_build_response(*nodes_[j].repo, query_a);
    SyncResponse resp_for_b = sync_build_response(*nodes_[i].repo, query_b);

    Transfer transfer;
    transfer.kind = TransferKind::Sync;
    transfer.items_for_a = sync_items(resp_for_a);
    transfer.items_for_b = sync_items(resp_for_b);
    transfer.query_bytes = encoded_size(Message(query_a)) + encoded_size(Message(query_b));
    transfer.response_bytes =
        encoded_size(Message(resp_for_a)) + encoded_size(Message(resp_for_b));
    transfer.completes_at =
        now + transfer_seconds(transfer.query_bytes + transfer.response_bytes);
    active_.emplace(pair_key(i, j), std::move(transfer));
}

void Engine::commit(uint64_t key, Transfer& t, uint64_t now) {
    uint32_t i = static_cast<uint32_t>(key / num_nodes_);
    uint32_t j = static_cast<uint32_t>(key % num_nodes_);
    SimNode& a = nodes_[i];
    SimNode& b = nodes_[j];

    if (t.kind == TransferKind::Handshake) {
        MergeReport ra =
            a.repo->merge({b.identity->public_key(), *t.cert_ab, *t.cert_ba});
        MergeReport rb =
            b.repo->merge({a.identity->public_key(), *t.cert_ba, *t.cert_ab});
        buffer_rejections_ += ra.rejected_count(RejectReason::BufferFull);
        buffer_rejections_ += rb.rejected_count(RejectReason::BufferFull);
        handshake_bytes_ += t.handshake_bytes;
        handshaked_.insert(key);
    } else {
        MergeReport ra = a.repo->merge(t.items_for_a);
        MergeReport rb = b.repo->merge(t.items_for_b);
        buffer_rejections_ += ra.rejected_count(RejectReason::BufferFull);
        buffer_rejections_ += rb.rejected_count(RejectReason::BufferFull);
        sync_accepted_ += ra.accepted + rb.accepted;
        sync_duplicate_ += ra.duplicates + rb.duplicates;
        sync_rejected_ += ra.rejected_total() + rb.rejected_total();
        sync_query_bytes_ += t.query_bytes;
        sync_response_bytes_ += t.response_bytes;
    }
    next_sync_at_[key] = now + config_.sync_interval_s;
}

void Engine::sample(uint64_t time_s) {
    MetricsSample s;
    s.time_s = time_s;
    s.known_by_depth.assign(config_.trust.maxdegree >= 2 ? config_.trust.maxdegree - 1 : 0, 0);
    for (const SimNode& node : nodes_) {
        TrustAssessment a = node.repo->evaluate();
        for (const auto& [fp, entry] : a.entries)
            if (entry.level == TrustLevel::Trusted) s.direct_total++;

        // known_d column for depth d counts peers transitively derivable
        // within d hops, independent of any direct relation they may also
        // have by now; that keeps every series non-decreasing.
        for (const auto& [fp, rec] : node.repo->records()) {
            if (fp == node.repo->owner_fp()) continue;
            uint32_t best = UINT32_MAX;
            uint32_t known_count = 0;
            uint32_t known_min = UINT32_MAX;
            for (const auto& [issuer_fp, cert] : rec.certificates) {
                auto it = a.entries.find(issuer_fp);
                if (it == a.entries.end()) continue;
                if (it->second.level == TrustLevel::Trusted) best = std::min(best, 2u);
                else if (it->second.level == TrustLevel::Known) {
                    known_count++;
                    known_min = std::min(known_min, it->second.depth + 1);
                }
            }
            if (known_count >= config_.trust.numknown) best = std::min(best, known_min);
            for (uint32_t d = std::max(best, 2u); d <= config_.trust.maxdegree; d++)
                s.known_by_depth[d - 2]++;
        }

        uint64_t bytes = node.repo->size_bytes();
        s.repo_bytes_total += bytes;
        s.repo_bytes_max = std::max(s.repo_bytes_max, bytes);
    }
    s.handshake_bytes = handshake_bytes_;
    s.sync_query_bytes = sync_query_bytes_;
    s.sync_response_bytes = sync_response_bytes_;
    s.sign_ops = counters_.sign_ops;
    s.verify_ops = counters_.verify_ops;
    s.aborted_transfers = aborted_transfers_;
    s.buffer_rejections = buffer_rejections_;
    log_.samples.push_back(std::move(s));
    if (sample_hook_) sample_hook_(*this, time_s);
}

MetricsLog Engine::run() {
    WorldBounds world{config_.width_m, config_.height_m, config_.speed_min_mps,
                      config_.speed_max_mps};
    sample(0);

    for (uint64_t t = config_.step_s; t <= config_.duration_s; t += config_.step_s) {
        double dt = static_cast<double>(config_.step_s);
        std::vector<Position> positions(num_nodes_);
        for (uint32_t i = 0; i < num_nodes_; i++) {
            rwp_step(nodes_[i].motion, world, dt, nodes_[i].rng);
            positions[i] = {nodes_[i].motion.x, nodes_[i].motion.y};
        }
        auto pairs = contacts(positions, config_.tx_range_m);
        std::set<uint64_t> in_contact;
        for (auto [i, j] : pairs) in_contact.insert(pair_key(i, j));

        // Finished transfers commit before contact loss is considered:
        // they completed while the contact still held.
        for (auto it = active_.begin(); it != active_.end();) {
            if (it->second.completes_at <= static_cast<double>(t)) {
                commit(it->first, it->second, t);
                it = active_.erase(it);
            } else if (!in_contact.contains(it->first)) {
                aborted_transfers_++;
                it = active_.erase(it);
            } else {
                ++it;
            }
        }

        for (auto [i, j] : pairs) {
            uint64_t key = pair_key(i, j);
            if (active_.contains(key)) continue;
            if (!handshaked_.contains(key)) {
                start_handshake(i, j, static_cast<double>(t));
            } else {
                auto next = next_sync_at_.find(key);
                if (next != next_sync_at_.end() && t >= next->second)
                    start_sync(i, j, static_cast<double>(t));
            }
        }

        if (t % kSampleCadence == 0) sample(t);
    }
    return std::move(log_);
}

MetricsLog run(const SimConfig& config, const Calibration& calibration) {
    Engine engine(config, calibration);
    return engine.run();
}

}  // namespace sol::sim
