#include "sol/sim/contacts.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace sol::sim {

namespace {

bool in_range(const Position& a, const Position& b, double range) {
    double dx = a.x - b.x;
    double dy = a.y - b.y;
    return dx * dx + dy * dy <= range * range;
}

}  // namespace

std::vector<std::pair<uint32_t, uint32_t>> contacts(std::span<const Position> nodes,
                                                    double tx_range) {
    std::vector<std::pair<uint32_t, uint32_t>> out;
    if (nodes.empty()) return out;

    auto cell_of = [&](const Position& p) {
        return std::pair<int64_t, int64_t>{static_cast<int64_t>(std::floor(p.x / tx_range)),
                                           static_cast<int64_t>(std::floor(p.y / tx_range))};
    };
    std::unordered_map<uint64_t, std::vector<uint32_t>> grid;
    auto key_of = [](int64_t cx, int64_t cy) {
        return static_cast<uint64_t>(cx) << 32 ^ static_cast<uint64_t>(cy & 0xffffffff);
    };
    for (uint32_t i = 0; i < nodes.size(); i++) {
        auto [cx, cy] = cell_of(nodes[i]);
        grid[key_of(cx, cy)].push_back(i);
    }
    for (uint32_t i = 0; i < nodes.size(); i++) {
        auto [cx, cy] = cell_of(nodes[i]);
        for (int64_t nx = cx - 1; nx <= cx + 1; nx++) {
            for (int64_t ny = cy - 1; ny <= cy + 1; ny++) {
                auto it = grid.find(key_of(nx, ny));
                if (it == grid.end()) continue;
                for (uint32_t j : it->second) {
                    if (j <= i) continue;
                    if (in_range(nodes[i], nodes[j], tx_range)) out.emplace_back(i, j);
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<uint32_t, uint32_t>> contacts_all_pairs(std::span<const Position> nodes,
                                                              double tx_range) {
    std::vector<std::pair<uint32_t, uint32_t>> out;
    for (uint32_t i = 0; i < nodes.size(); i++)
        for (uint32_t j = i + 1; j < nodes.size(); j++)
            if (in_range(nodes[i], nodes[j], tx_range)) out.emplace_back(i, j);
    return out;
}

}  // namespace sol::sim
