#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sol::sim {

// One row per sampling instant; byte and operation counters are
// cumulative since the start of the run.
struct MetricsSample {
    uint64_t time_s = 0;
    uint64_t direct_total = 0;  // Trusted entries summed over nodes
    // known_by_depth[k] counts (node, peer) pairs with a transitive
    // derivation within depth <= k+2; columns are cumulative in depth so
    // every series is non-decreasing over time.
    std::vector<uint64_t> known_by_depth;
    uint64_t handshake_bytes = 0;
    uint64_t sync_query_bytes = 0;
    uint64_t sync_response_bytes = 0;
    uint64_t sign_ops = 0;
    uint64_t verify_ops = 0;
    uint64_t repo_bytes_total = 0;
    uint64_t repo_bytes_max = 0;
    uint64_t aborted_transfers = 0;
    uint64_t buffer_rejections = 0;

    uint64_t total_bytes() const { return handshake_bytes + sync_query_bytes + sync_response_bytes; }
    uint64_t known_total() const;
    bool operator==(const MetricsSample&) const = default;
};

struct MetricsLog {
    uint32_t maxdegree = 0;
    uint32_t num_nodes = 0;
    std::vector<MetricsSample> samples;

    std::string csv_header() const;
    std::string to_csv() const;
    bool operator==(const MetricsLog&) const = default;
};

// Writes the CSV; throws IoError when the file cannot be written.
void export_metrics(const MetricsLog& log, const std::filesystem::path& path);

}  // namespace sol::sim
