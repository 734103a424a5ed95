#pragma once

#include <filesystem>
#include <string>

#include "sol/types.hpp"

namespace sol::sim {

enum class CryptoMode {
    Real,       // seeded OpenSSL keys and signatures
    SizeModel,  // calibrated placeholder bytes, counters still tick
};

std::string_view crypto_mode_name(CryptoMode m);
CryptoMode crypto_mode_from_name(std::string_view name);

struct SimConfig {
    double width_m = 3000.0;
    double height_m = 3000.0;
    uint32_t num_nodes = 120;
    uint64_t duration_s = 43200;
    double speed_min_mps = 0.5;
    double speed_max_mps = 1.5;
    double tx_range_m = 10.0;
    uint64_t tx_rate_bps = 2'000'000;
    uint64_t buffer_bytes = 20ull * 1024 * 1024;
    uint64_t sync_interval_s = 10;
    TrustConfig trust;
    uint64_t seed = 1;
    CryptoMode crypto_mode = CryptoMode::SizeModel;
    uint64_t step_s = 1;

    // Throws InvalidConfig on non-positive dimensions/counts, inverted
    // speed range, or a step that does not divide the metrics cadence.
    void validate() const;
};

// Plain key=value scenario files mirroring the SimConfig fields ('#'
// comments allowed); unknown keys throw InvalidConfig.
SimConfig parse_scenario_file(const std::filesystem::path& path, SimConfig base = {});
void apply_scenario_setting(SimConfig& config, std::string_view key, std::string_view value);

}  // namespace sol::sim
