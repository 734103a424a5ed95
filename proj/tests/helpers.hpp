#pragma once

// Shared scaffolding for unit and acceptance tests: placeholder-crypto
// worlds, random repository cases and their reference edge lists.

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "sol/crypto.hpp"
#include "sol/sim/size_model.hpp"
#include "sol/trust_graph.hpp"

namespace sol::testing {

inline const sim::Calibration& test_calibration() {
    static sim::Calibration calib = sim::Calibration::measure();
    return calib;
}

// n placeholder devices; device 0 owns the repository under test.
struct PlaceholderWorld {
    explicit PlaceholderWorld(uint32_t n, TrustConfig config = {}, uint64_t seed = 7)
        : verifier(test_calibration(), &counters) {
        config.validate();
        for (uint32_t i = 0; i < n; i++)
            devices.push_back(std::make_unique<sim::PlaceholderIdentity>(
                seed * 1000 + i, config.signaturealgorithm, test_calibration(), &counters));
        repo = std::make_unique<TrustRepository>(devices[0]->public_key(), config, &verifier);
    }

    Certificate cert(uint32_t issuer, uint32_t subject, uint64_t at = 100) {
        return make_certificate(*devices[issuer], devices[subject]->public_key(), at);
    }

    Fingerprint fp(uint32_t i) const { return devices[i]->fingerprint(); }

    CryptoCounters counters;
    sim::PlaceholderVerifier verifier;
    std::vector<std::unique_ptr<sim::PlaceholderIdentity>> devices;
    std::unique_ptr<TrustRepository> repo;
};

// One randomized repository: a batch of keys/certificates merged into an
// owner repo, plus the valid-certificate edge list for the oracles.
struct RandomRepoCase {
    std::unique_ptr<PlaceholderWorld> world;
    OracleInput oracle_in;
    std::vector<MergeItem> batch;
    MergeReport report;
};

inline RandomRepoCase make_random_repo(std::mt19937_64& rng, uint32_t max_devices = 10,
                                       uint32_t max_certs = 25) {
    auto pick = [&](uint32_t lo, uint32_t hi) {
        return lo + static_cast<uint32_t>(rng() % (hi - lo + 1));
    };
    TrustConfig config;
    config.maxdegree = pick(1, 3);
    config.numknown = pick(1, 2);

    RandomRepoCase c;
    uint32_t n = pick(2, max_devices);
    c.world = std::make_unique<PlaceholderWorld>(n, config, rng());
    c.oracle_in.num_devices = n;
    c.oracle_in.owner = 0;
    c.oracle_in.maxdegree = config.maxdegree;
    c.oracle_in.numknown = config.numknown;

    for (uint32_t i = 1; i < n; i++) c.batch.emplace_back(c.world->devices[i]->public_key());

    uint32_t n_certs = pick(0, max_certs);
    for (uint32_t k = 0; k < n_certs; k++) {
        uint32_t issuer, subject;
        // Bias toward owner-rooted chains so upper trust levels appear.
        if (rng() % 100 < 30) {
            issuer = 0;
            subject = pick(1, n - 1);
        } else {
            issuer = pick(0, n - 1);
            do {
                subject = pick(0, n - 1);
            } while (subject == issuer);
        }
        auto edge = std::make_pair(issuer, subject);
        if (std::find(c.oracle_in.edges.begin(), c.oracle_in.edges.end(), edge) !=
            c.oracle_in.edges.end())
            continue;
        c.oracle_in.edges.push_back(edge);
        c.batch.emplace_back(c.world->cert(issuer, subject, 100 + k));
    }

    std::shuffle(c.batch.begin(), c.batch.end(), rng);
    c.report = c.world->repo->merge(c.batch);
    return c;
}

// Certification edges actually stored in a repository, mapped back to
// device indices (UINT32_MAX when a fingerprint is not one of ours).
inline std::vector<std::pair<uint32_t, uint32_t>> stored_edges(const PlaceholderWorld& world) {
    auto index_of = [&](const Fingerprint& fp) -> uint32_t {
        for (uint32_t i = 0; i < world.devices.size(); i++)
            if (world.fp(i) == fp) return i;
        return UINT32_MAX;
    };
    std::vector<std::pair<uint32_t, uint32_t>> edges;
    for (const auto& [subject_fp, rec] : world.repo->records()) {
        uint32_t subject = index_of(subject_fp);
        for (const auto& [issuer_fp, cert] : rec.certificates)
            edges.emplace_back(index_of(issuer_fp), subject);
    }
    return edges;
}

// Compares the repository's own evaluation with an oracle result.
inline bool assessment_matches(const PlaceholderWorld& world,
                               const std::vector<OracleEntry>& expected) {
    TrustAssessment a = world.repo->evaluate();
    for (uint32_t i = 0; i < world.devices.size(); i++) {
        TrustLevel level = a.level(world.fp(i));
        if (level != expected[i].level) return false;
        if (level != TrustLevel::Unknown && a.depth(world.fp(i)) != expected[i].depth)
            return false;
    }
    return true;
}

struct TempDir {
    explicit TempDir(const std::string& tag) {
        static std::atomic<uint64_t> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("sol_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path path;
};

}  // namespace sol::testing
