#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "sol/crypto.hpp"
#include "sol/sim/config.hpp"
#include "sol/sim/metrics.hpp"
#include "sol/sim/mobility.hpp"
#include "sol/sim/size_model.hpp"
#include "sol/trust_graph.hpp"

namespace sol::sim {

struct SimNode {
    std::unique_ptr<SigningIdentity> identity;
    std::unique_ptr<TrustRepository> repo;
    RwpState motion;
    std::mt19937_64 rng;
};

// Fixed-step loop: move, detect contacts, commit or abort in-flight
// exchanges, start handshakes on first contact and pairwise syncs every
// sync_interval_s, sample metrics every 60 simulated seconds. Fully
// deterministic for a given config.
class Engine {
public:
    Engine(SimConfig config, Calibration calibration);

    MetricsLog run();

    // Inspection for tests and invariant checks.
    const std::vector<SimNode>& nodes() const { return nodes_; }
    const SimConfig& config() const { return config_; }
    using SampleHook = std::function<void(const Engine&, uint64_t time_s)>;
    void set_sample_hook(SampleHook hook) { sample_hook_ = std::move(hook); }

    // Aggregate sync-merge composition over the whole run.
    uint64_t sync_items_accepted() const { return sync_accepted_; }
    uint64_t sync_items_duplicate() const { return sync_duplicate_; }
    uint64_t sync_items_rejected() const { return sync_rejected_; }

private:
    enum class TransferKind { Handshake, Sync };
    struct Transfer {
        TransferKind kind;
        double completes_at = 0;
        // staged handshake material
        std::optional<Certificate> cert_ab, cert_ba;
        // staged sync material (both directions, snapshot at start)
        std::vector<MergeItem> items_for_a, items_for_b;
        uint64_t handshake_bytes = 0;
        uint64_t query_bytes = 0;
        uint64_t response_bytes = 0;
    };

    uint64_t pair_key(uint32_t i, uint32_t j) const { return uint64_t(i) * num_nodes_ + j; }
    void start_handshake(uint32_t i, uint32_t j, double now);
    void start_sync(uint32_t i, uint32_t j, double now);
    void commit(uint64_t key, Transfer& t, uint64_t now);
    void sample(uint64_t time_s);
    double transfer_seconds(uint64_t bytes) const {
        return static_cast<double>(bytes) * 8.0 / static_cast<double>(config_.tx_rate_bps);
    }

    SimConfig config_;
    Calibration calibration_;
    uint32_t num_nodes_;
    CryptoCounters counters_;
    std::unique_ptr<Verifier> verifier_;
    std::vector<SimNode> nodes_;
    std::set<uint64_t> handshaked_;
    std::map<uint64_t, uint64_t> next_sync_at_;
    std::map<uint64_t, Transfer> active_;
    MetricsLog log_;
    uint64_t handshake_bytes_ = 0;
    uint64_t sync_query_bytes_ = 0;
    uint64_t sync_response_bytes_ = 0;
    uint64_t aborted_transfers_ = 0;
    uint64_t buffer_rejections_ = 0;
    uint64_t sync_accepted_ = 0;
    uint64_t sync_duplicate_ = 0;
    uint64_t sync_rejected_ = 0;
    SampleHook sample_hook_;
};

// The plain entry point: build an engine and run it.
MetricsLog run(const SimConfig& config, const Calibration& calibration);

}  // namespace sol::sim
