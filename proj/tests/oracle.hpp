#pragma once

// Brute-force trust oracles, independent of the TrustRepository
// implementation. They operate on a bare certification edge list
// (issuer -> subject), recomputing every device from scratch each round
// (Jacobi style) instead of the repository's in-place worklist, and the
// path oracle enumerates certification paths explicitly.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "sol/types.hpp"

namespace sol::testing {

struct OracleInput {
    uint32_t num_devices = 0;
    uint32_t owner = 0;
    std::vector<std::pair<uint32_t, uint32_t>> edges;  // (issuer, subject)
    uint32_t maxdegree = 3;
    uint32_t numknown = 1;
};

struct OracleEntry {
    TrustLevel level = TrustLevel::Unknown;
    uint32_t depth = UINT32_MAX;
};

inline std::vector<OracleEntry> oracle_evaluate(const OracleInput& in) {
    std::vector<OracleEntry> state(in.num_devices);
    state[in.owner] = {TrustLevel::Ultimate, 0};

    auto has_edge = [&](uint32_t i, uint32_t s) {
        return std::find(in.edges.begin(), in.edges.end(), std::make_pair(i, s)) !=
               in.edges.end();
    };

    for (uint32_t round = 0; round < in.num_devices * in.num_devices + 2; round++) {
        std::vector<OracleEntry> next(in.num_devices);
        next[in.owner] = {TrustLevel::Ultimate, 0};
        for (uint32_t s = 0; s < in.num_devices; s++) {
            if (s == in.owner) continue;
            if (has_edge(in.owner, s)) {
                next[s] = {TrustLevel::Trusted, 1};
                continue;
            }
            uint32_t cand = UINT32_MAX;
            if (in.maxdegree >= 2) {
                for (uint32_t i = 0; i < in.num_devices; i++)
                    if (state[i].level == TrustLevel::Trusted && has_edge(i, s))
                        cand = std::min(cand, 2u);
            }
            uint32_t known_count = 0;
            uint32_t known_min = UINT32_MAX;
            for (uint32_t i = 0; i < in.num_devices; i++) {
                if (state[i].level == TrustLevel::Known && has_edge(i, s)) {
                    known_count++;
                    known_min = std::min(known_min, state[i].depth + 1);
                }
            }
            if (known_count >= in.numknown && known_min <= in.maxdegree)
                cand = std::min(cand, known_min);
            if (cand != UINT32_MAX) next[s] = {TrustLevel::Known, cand};
        }
        bool same = true;
        for (uint32_t s = 0; s < in.num_devices; s++)
            if (next[s].level != state[s].level || next[s].depth != state[s].depth) same = false;
        state = next;
        if (same) break;
    }
    return state;
}

// numknown == 1 cross-check: enumerate every simple certification path of
// length <= maxdegree from the owner and keep the shortest per target.
inline std::vector<OracleEntry> oracle_paths(const OracleInput& in) {
    std::vector<OracleEntry> state(in.num_devices);
    state[in.owner] = {TrustLevel::Ultimate, 0};

    std::vector<uint32_t> best(in.num_devices, UINT32_MAX);
    std::vector<bool> on_path(in.num_devices, false);
    on_path[in.owner] = true;

    auto dfs = [&](auto&& self, uint32_t at, uint32_t len) -> void {
        if (len >= in.maxdegree) return;
        for (auto [i, s] : in.edges) {
            if (i != at || on_path[s]) continue;
            best[s] = std::min(best[s], len + 1);
            on_path[s] = true;
            self(self, s, len + 1);
            on_path[s] = false;
        }
    };
    dfs(dfs, in.owner, 0);

    for (uint32_t s = 0; s < in.num_devices; s++) {
        if (s == in.owner) continue;
        if (best[s] == 1)
            state[s] = {TrustLevel::Trusted, 1};
        else if (best[s] <= in.maxdegree)
            state[s] = {TrustLevel::Known, best[s]};
    }
    return state;
}

}  // namespace sol::testing
