#include "sol/sim/config.hpp"

#include <charconv>
#include <fstream>

#include "sol/errors.hpp"

namespace sol::sim {

std::string_view crypto_mode_name(CryptoMode m) {
    return m == CryptoMode::Real ? "real" : "size_model";
}

CryptoMode crypto_mode_from_name(std::string_view name) {
    if (name == "real") return CryptoMode::Real;
    if (name == "size_model" || name == "sizemodel") return CryptoMode::SizeModel;
    throw InvalidConfig("unknown crypto mode: " + std::string(name));
}

void SimConfig::validate() const {
    if (width_m <= 0 || height_m <= 0) throw InvalidConfig("world dimensions must be positive");
    if (num_nodes < 1) throw InvalidConfig("num_nodes must be >= 1");
    if (duration_s < 1) throw InvalidConfig("duration_s must be >= 1");
    if (speed_min_mps < 0 || speed_max_mps < 0) throw InvalidConfig("speeds must be >= 0");
    if (speed_min_mps > speed_max_mps) throw InvalidConfig("speed_min must be <= speed_max");
    if (tx_range_m <= 0) throw InvalidConfig("tx_range_m must be positive");
    if (tx_rate_bps < 1) throw InvalidConfig("tx_rate_bps must be >= 1");
    if (sync_interval_s < 1) throw InvalidConfig("sync_interval_s must be >= 1");
    if (step_s < 1) throw InvalidConfig("step_s must be >= 1");
    if (60 % step_s != 0) throw InvalidConfig("step_s must divide the 60 s metrics cadence");
    trust.validate();
}

namespace {

uint64_t parse_u64(std::string_view key, std::string_view value) {
    uint64_t out = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || p != value.data() + value.size())
        throw InvalidConfig("bad integer for " + std::string(key) + ": " + std::string(value));
    return out;
}

double parse_double(std::string_view key, std::string_view value) {
    try {
        size_t used = 0;
        double out = std::stod(std::string(value), &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw InvalidConfig("bad number for " + std::string(key) + ": " + std::string(value));
    }
}

}  // namespace

void apply_scenario_setting(SimConfig& c, std::string_view key, std::string_view value) {
    if (key == "width_m") c.width_m = parse_double(key, value);
    else if (key == "height_m") c.height_m = parse_double(key, value);
    else if (key == "num_nodes") c.num_nodes = static_cast<uint32_t>(parse_u64(key, value));
    else if (key == "duration_s") c.duration_s = parse_u64(key, value);
    else if (key == "speed_min_mps") c.speed_min_mps = parse_double(key, value);
    else if (key == "speed_max_mps") c.speed_max_mps = parse_double(key, value);
    else if (key == "tx_range_m") c.tx_range_m = parse_double(key, value);
    else if (key == "tx_rate_bps") c.tx_rate_bps = parse_u64(key, value);
    else if (key == "buffer_bytes") c.buffer_bytes = parse_u64(key, value);
    else if (key == "sync_interval_s") c.sync_interval_s = parse_u64(key, value);
    else if (key == "seed") c.seed = parse_u64(key, value);
    else if (key == "step_s") c.step_s = parse_u64(key, value);
    else if (key == "maxdegree") c.trust.maxdegree = static_cast<uint32_t>(parse_u64(key, value));
    else if (key == "numknown") c.trust.numknown = static_cast<uint32_t>(parse_u64(key, value));
    else if (key == "maxsubkeys") c.trust.maxsubkeys = static_cast<uint32_t>(parse_u64(key, value));
    else if (key == "signaturealgorithm") c.trust.signaturealgorithm = algorithm_from_name(value);
    else if (key == "crypto_mode") c.crypto_mode = crypto_mode_from_name(value);
    else throw InvalidConfig("unknown scenario key: " + std::string(key));
}

SimConfig parse_scenario_file(const std::filesystem::path& path, SimConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read scenario file: " + path.string());
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        size_t begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        size_t end = line.find_last_not_of(" \t\r");
        std::string trimmed = line.substr(begin, end - begin + 1);
        size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw InvalidConfig(path.string() + ":" + std::to_string(lineno) +
                                ": expected key=value");
        apply_scenario_setting(base, trimmed.substr(0, eq), trimmed.substr(eq + 1));
    }
    return base;
}

}  // namespace sol::sim
