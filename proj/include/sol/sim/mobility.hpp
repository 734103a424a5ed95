#pragma once

#include <cstdint>
#include <random>

namespace sol::sim {

// Deterministic uniform draw in [0, 1); distributions from <random> are
// not bit-identical across standard libraries, this is.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
    return lo + uniform01(rng) * (hi - lo);
}

// splitmix64; used to derive independent per-node seeds from the master.
uint64_t mix_seed(uint64_t seed, uint64_t stream, uint64_t index);

// Random-waypoint movement with zero pause time: straight line to the
// waypoint at the drawn speed, then a fresh uniform waypoint and speed.
struct RwpState {
    double x = 0, y = 0;
    double wx = 0, wy = 0;
    double speed = 0;
};

struct WorldBounds {
    double width = 0, height = 0;
    double speed_min = 0, speed_max = 0;
};

RwpState rwp_init(const WorldBounds& world, std::mt19937_64& rng);
void rwp_step(RwpState& node, const WorldBounds& world, double dt, std::mt19937_64& rng);

}  // namespace sol::sim
