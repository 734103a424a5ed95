#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace sol::sim {

struct Position {
    double x = 0, y = 0;
};

// All unordered index pairs within tx_range (inclusive), sorted. Uses a
// uniform grid of cell size tx_range so only neighbor cells are scanned;
// expected O(n) for sparse deployments.
std::vector<std::pair<uint32_t, uint32_t>> contacts(std::span<const Position> nodes,
                                                    double tx_range);

// Quadratic reference used by tests.
std::vector<std::pair<uint32_t, uint32_t>> contacts_all_pairs(std::span<const Position> nodes,
                                                              double tx_range);

}  // namespace sol::sim
