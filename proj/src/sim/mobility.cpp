#include "sol/sim/mobility.hpp"

#include <cmath>

namespace sol::sim {

uint64_t mix_seed(uint64_t seed, uint64_t stream, uint64_t index) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream * 0x100000001b3ull + index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace {

void draw_waypoint(RwpState& node, const WorldBounds& world, std::mt19937_64& rng) {
    node.wx = uniform_range(rng, 0.0, world.width);
    node.wy = uniform_range(rng, 0.0, world.height);
    node.speed = uniform_range(rng, world.speed_min, world.speed_max);
}

}  // namespace

RwpState rwp_init(const WorldBounds& world, std::mt19937_64& rng) {
    RwpState node;
    node.x = uniform_range(rng, 0.0, world.width);
    node.y = uniform_range(rng, 0.0, world.height);
    draw_waypoint(node, world, rng);
    return node;
}

void rwp_step(RwpState& node, const WorldBounds& world, double dt, std::mt19937_64& rng) {
    double remaining = dt;
    // Bounded leg count per step; with zero speed the node stays put.
    for (int leg = 0; leg < 16 && remaining > 0; leg++) {
        if (node.speed <= 0) return;
        double dx = node.wx - node.x;
        double dy = node.wy - node.y;
        double dist = std::hypot(dx, dy);
        double reach = node.speed * remaining;
        if (reach < dist) {
            node.x += dx / dist * reach;
            node.y += dy / dist * reach;
            return;
        }
        node.x = node.wx;
        node.y = node.wy;
        if (node.speed > 0) remaining -= dist / node.speed;
        draw_waypoint(node, world, rng);
    }
}

}  // namespace sol::sim
