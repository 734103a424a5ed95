// Acceptance suite: one check per release criterion, each printing a
// single PASS/FAIL line. Exits nonzero if any criterion fails.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "helpers.hpp"
#include "oracle.hpp"
#include "sol/codec.hpp"
#include "sol/keystore.hpp"
#include "sol/protocol.hpp"
#include "sol/sim/engine.hpp"

using namespace sol;
using namespace sol::testing;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& label, const std::string& detail) {
    std::printf("%s  C%-2d %s (%s)\n", pass ? "PASS" : "FAIL", criterion, label.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) g_failures++;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format(const char* fmt, ...) {
    char buffer[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buffer, sizeof buffer, fmt, args);
    va_end(args);
    return buffer;
}

// ---- criterion 1: trust-evaluation oracle equivalence -------------------

void criterion_1() {
    auto start = Clock::now();
    std::mt19937_64 rng(0xacce97a9ce1ull);
    const int kRepos = 10000;
    int mismatches = 0;
    int path_checked = 0;
    for (int i = 0; i < kRepos; i++) {
        RandomRepoCase c = make_random_repo(rng);
        if (!assessment_matches(*c.world, oracle_evaluate(c.oracle_in))) mismatches++;
        if (c.oracle_in.numknown == 1) {
            if (!assessment_matches(*c.world, oracle_paths(c.oracle_in))) mismatches++;
            path_checked++;
        }
        OracleInput stored = c.oracle_in;
        stored.edges = stored_edges(*c.world);
        if (!assessment_matches(*c.world, oracle_evaluate(stored))) mismatches++;
    }
    double elapsed = seconds_since(start);
    report(1, mismatches == 0 && elapsed < 60.0, "trust evaluation equals brute-force oracles",
           format("%d repositories, %d path-oracle cross-checks, %d mismatches, %.1fs", kRepos,
                  path_checked, mismatches, elapsed));
}

// ---- criterion 2: merge safety under forgery -----------------------------

void criterion_2() {
    std::mt19937_64 rng(0x5afe7e57ull);
    const int kRepos = 1000;
    int violations = 0;
    int forgeries_accepted = 0;
    for (int i = 0; i < kRepos; i++) {
        RandomRepoCase c = make_random_repo(rng, 8, 18);
        PlaceholderWorld& w = *c.world;
        TrustAssessment before = w.repo->evaluate();

        // One forged certificate per repo (1000 total): either the claimed
        // issuer never signed it, or the signature bits are corrupted.
        uint32_t n = static_cast<uint32_t>(w.devices.size());
        uint32_t actual = rng() % n;
        uint32_t subject = (actual + 1 + rng() % (n - 1)) % n;
        Certificate forged = make_certificate(*w.devices[actual],
                                              w.devices[subject]->public_key(), 4000);
        if (n >= 3) {
            uint32_t claimed;
            do {
                claimed = rng() % n;
            } while (claimed == actual || claimed == subject);
            forged.issuer_fp = w.fp(claimed);
        } else {
            forged.sig[rng() % forged.sig.size()] ^= static_cast<uint8_t>(1 + rng() % 255);
        }

        MergeReport report_ = w.repo->merge({w.devices[subject]->public_key(), forged});
        if (report_.accepted != 0) forgeries_accepted++;

        // No trust level may move.
        TrustAssessment after = w.repo->evaluate();
        for (const auto& [fp, entry] : before.entries)
            if (after.level(fp) != entry.level || after.depth(fp) != entry.depth) violations++;
        for (const auto& [fp, entry] : after.entries)
            if (before.level(fp) != entry.level) violations++;

        // Every stored certificate still verifies.
        for (const auto& [subject_fp, rec] : w.repo->records()) {
            for (const auto& [issuer_fp, cert] : rec.certificates) {
                const SubjectRecord* issuer = w.repo->find(issuer_fp);
                Bytes payload =
                    certificate_signing_payload(rec.key.encoded(), issuer_fp, cert.issued_at);
                if (!issuer || !w.verifier.verify(issuer->key, payload, cert.sig)) violations++;
            }
        }
    }
    report(2, violations == 0 && forgeries_accepted == 0,
           "forged material never lands nor moves a trust level",
           format("%d repositories + forgeries, %d violations, %d forgeries accepted", kRepos,
                  violations, forgeries_accepted));
}

// ---- criterion 3: persistence round-trip + tamper isolation ---------------

void criterion_3() {
    std::mt19937_64 rng(0x9e7519ull);
    const int kRepos = 1000;
    int violations = 0;
    int tamper_checks = 0;
    TempDir dir("acceptance_persist");
    for (int i = 0; i < kRepos; i++) {
        RandomRepoCase c = make_random_repo(rng, 7, 15);
        PlaceholderWorld& w = *c.world;
        std::filesystem::path root = dir.path / ("repo_" + std::to_string(i));
        w.repo->persist(root);
        LoadReport loaded = TrustRepository::load(root, w.repo->config(), &w.verifier);
        if (!loaded.warnings.empty()) violations++;

        TrustAssessment a = w.repo->evaluate();
        TrustAssessment b = loaded.repo.evaluate();
        if (a.entries.size() != b.entries.size()) violations++;
        for (const auto& [fp, entry] : a.entries)
            if (b.level(fp) != entry.level || b.depth(fp) != entry.depth) violations++;
        if (loaded.repo.size_bytes() != w.repo->size_bytes()) violations++;

        // Tamper with one certificate file when the repo has one.
        std::filesystem::path cert_file;
        for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
            if (entry.is_regular_file() &&
                entry.path().filename().string().rfind("cert_", 0) == 0) {
                cert_file = entry.path();
                break;
            }
        }
        if (!cert_file.empty()) {
            tamper_checks++;
            std::string content;
            {
                std::ifstream in(cert_file);
                std::ostringstream ss;
                ss << in.rdbuf();
                content = ss.str();
            }
            size_t pos = content.size() / 2;
            content[pos] = content[pos] == 'A' ? 'B' : 'A';
            {
                std::ofstream out(cert_file, std::ios::trunc);
                out << content;
            }
            LoadReport tampered = TrustRepository::load(root, w.repo->config(), &w.verifier);
            if (tampered.warnings.size() != 1) violations++;
            // Exactly the records are intact; only the tampered
            // certificate vanished.
            size_t certs_before = 0, certs_after = 0;
            for (const auto& [fp, rec] : loaded.repo.records()) certs_before += rec.certificates.size();
            for (const auto& [fp, rec] : tampered.repo.records()) certs_after += rec.certificates.size();
            if (certs_after + 1 != certs_before) violations++;
            if (tampered.repo.records().size() != loaded.repo.records().size()) violations++;
        }
        std::filesystem::remove_all(root);
    }
    report(3, violations == 0, "persistence survives round trips and isolates tampering",
           format("%d repositories, %d tamper checks, %d violations", kRepos, tamper_checks,
                  violations));
}

// ---- criterion 4: protocol convergence ------------------------------------

void criterion_4() {
    std::mt19937_64 rng(0xc04e79eull);
    const int kTopologies = 200;
    int violations = 0;
    for (int t = 0; t < kTopologies; t++) {
        TrustConfig config;
        config.maxdegree = 1 + rng() % 3;
        CryptoCounters counters;
        sim::PlaceholderVerifier verifier(test_calibration(), &counters);
        std::vector<std::unique_ptr<sim::PlaceholderIdentity>> ids;
        std::vector<std::unique_ptr<TrustRepository>> repos;
        for (uint32_t i = 0; i < 3; i++) {
            ids.push_back(std::make_unique<sim::PlaceholderIdentity>(
                t * 100 + i, config.signaturealgorithm, test_calibration(), &counters));
            repos.push_back(
                std::make_unique<TrustRepository>(ids[i]->public_key(), config, &verifier));
        }
        auto ctx = [&](uint32_t i) { return NodeContext{*ids[i], *repos[i]}; };

        std::vector<std::pair<uint32_t, uint32_t>> edges;
        for (auto e : {std::pair<uint32_t, uint32_t>{0, 1}, {0, 2}, {1, 2}})
            if (rng() % 2) edges.push_back(e);
        ComparingOoBVerifier oob;
        for (auto [i, j] : edges) handshake_run(ctx(i), ctx(j), oob, 5);

        // After at most |edges| pairwise passes the state must be a global
        // fixed point: the verification pass merges nothing.
        for (size_t pass = 1; pass <= edges.size(); pass++) {
            size_t merged = 0;
            for (auto [i, j] : edges) {
                merged += sync_run(ctx(i), ctx(j), 50).items_merged;
                merged += sync_run(ctx(j), ctx(i), 50).items_merged;
            }
            if (merged == 0) break;
        }
        size_t extra = 0;
        for (auto [i, j] : edges) {
            extra += sync_run(ctx(i), ctx(j), 60).items_merged;
            extra += sync_run(ctx(j), ctx(i), 60).items_merged;
        }
        if (extra != 0) violations++;

        // All reachable-within-degree devices present with oracle-exact
        // levels and depths.
        for (uint32_t node = 0; node < 3; node++) {
            OracleInput in;
            in.num_devices = 3;
            in.owner = node;
            in.maxdegree = config.maxdegree;
            in.numknown = config.numknown;
            for (auto [i, j] : edges) {
                in.edges.emplace_back(i, j);
                in.edges.emplace_back(j, i);
            }
            auto expected = oracle_paths(in);
            TrustAssessment got = repos[node]->evaluate();
            for (uint32_t other = 0; other < 3; other++) {
                Fingerprint fp = fingerprint(ids[other]->public_key());
                if (got.level(fp) != expected[other].level) violations++;
                if (expected[other].level != TrustLevel::Unknown &&
                    got.depth(fp) != expected[other].depth)
                    violations++;
            }
        }
    }
    report(4, violations == 0, "pairwise syncs reach the global fixed point in |edges| rounds",
           format("%d random 3-node topologies, %d violations", kTopologies, violations));
}

// ---- criteria 5-8, 10: scaled-down simulation trends ----------------------

struct RunKey {
    uint32_t degree;
    Algorithm algo;
    uint64_t seed;
    bool operator<(const RunKey& other) const {
        return std::tie(degree, algo, seed) < std::tie(other.degree, other.algo, other.seed);
    }
};

sim::SimConfig desk_scenario(uint32_t degree, Algorithm algo, uint64_t seed) {
    sim::SimConfig c;
    c.width_m = 1000;
    c.height_m = 1000;
    c.num_nodes = 40;
    c.duration_s = 7200;
    c.trust.maxdegree = degree;
    c.trust.signaturealgorithm = algo;
    c.seed = seed;
    c.crypto_mode = sim::CryptoMode::SizeModel;
    return c;
}

std::map<RunKey, sim::MetricsLog> run_desk_matrix(double* max_wall_s) {
    std::map<RunKey, sim::MetricsLog> runs;
    *max_wall_s = 0;
    for (uint64_t seed = 1; seed <= 5; seed++) {
        for (uint32_t degree : {1u, 2u, 3u}) {
            auto t0 = Clock::now();
            runs.emplace(RunKey{degree, Algorithm::EcdsaP256, seed},
                         sim::run(desk_scenario(degree, Algorithm::EcdsaP256, seed),
                                  test_calibration()));
            *max_wall_s = std::max(*max_wall_s, seconds_since(t0));
        }
        auto t0 = Clock::now();
        runs.emplace(RunKey{3, Algorithm::Rsa2048, seed},
                     sim::run(desk_scenario(3, Algorithm::Rsa2048, seed), test_calibration()));
        *max_wall_s = std::max(*max_wall_s, seconds_since(t0));
    }
    return runs;
}

void criterion_5(const std::map<RunKey, sim::MetricsLog>& runs) {
    bool pass = true;
    std::string detail;
    for (uint64_t seed = 1; seed <= 5; seed++) {
        uint64_t totals[4] = {0, 0, 0, 0};
        uint64_t direct[4] = {0, 0, 0, 0};
        for (uint32_t degree : {1u, 2u, 3u}) {
            const auto& last = runs.at(RunKey{degree, Algorithm::EcdsaP256, seed}).samples.back();
            totals[degree] = last.direct_total + last.known_total();
            direct[degree] = last.direct_total;
        }
        if (!(totals[1] < totals[2] && totals[2] < totals[3])) pass = false;
        uint64_t dmin = std::min({direct[1], direct[2], direct[3]});
        uint64_t dmax = std::max({direct[1], direct[2], direct[3]});
        if (dmax > 0 && (dmax - dmin) * 10 >= dmax) pass = false;  // >= 10% spread
        const auto& deg3 = runs.at(RunKey{3, Algorithm::EcdsaP256, seed}).samples.back();
        if (deg3.known_total() < 2 * deg3.direct_total) pass = false;
        if (seed == 1)
            detail = format("seed1 totals d1=%llu d2=%llu d3=%llu, deg3 known=%llu direct=%llu",
                            (unsigned long long)totals[1], (unsigned long long)totals[2],
                            (unsigned long long)totals[3],
                            (unsigned long long)deg3.known_total(),
                            (unsigned long long)deg3.direct_total);
    }
    report(5, pass, "relations grow with degree, direct stays flat, transitive dominates",
           detail);
}

void criterion_6(const std::map<RunKey, sim::MetricsLog>& runs) {
    bool sync_dominates = true;
    bool share_over_half = true;
    bool share_increasing = true;
    double mean_share[4] = {0, 0, 0, 0};
    for (uint64_t seed = 1; seed <= 5; seed++) {
        for (uint32_t degree : {2u, 3u}) {
            const auto& log = runs.at(RunKey{degree, Algorithm::EcdsaP256, seed});
            const auto& last = log.samples.back();
            uint64_t sync_total = last.sync_query_bytes + last.sync_response_bytes;
            if (!(sync_total > last.handshake_bytes)) sync_dominates = false;

            // Final quarter of the run.
            size_t cut = log.samples.size() - (log.samples.size() - 1) / 4 - 1;
            const auto& at_cut = log.samples[cut];
            uint64_t dq = last.sync_query_bytes - at_cut.sync_query_bytes;
            uint64_t dr = last.sync_response_bytes - at_cut.sync_response_bytes;
            if (dq + dr == 0) {
                share_over_half = false;
                continue;
            }
            double share = static_cast<double>(dq) / static_cast<double>(dq + dr);
            mean_share[degree] += share / 5.0;
            if (share <= 0.5) share_over_half = false;
        }
    }
    if (!(mean_share[3] > mean_share[2])) share_increasing = false;
    report(6, sync_dominates && share_over_half && share_increasing,
           "sync dominates handshake and queries dominate sync",
           format("sync>handshake: %s; final-quarter query share deg2=%.1f%% deg3=%.1f%%, "
                  ">50%%: %s, increasing with degree: %s",
                  sync_dominates ? "yes" : "NO", mean_share[2] * 100, mean_share[3] * 100,
                  share_over_half ? "yes" : "NO", share_increasing ? "yes" : "NO"));
}

void criterion_7(const std::map<RunKey, sim::MetricsLog>& runs) {
    bool pass = true;
    uint64_t rsa1 = 0, ec1 = 0;
    for (uint64_t seed = 1; seed <= 5; seed++) {
        const auto& rsa = runs.at(RunKey{3, Algorithm::Rsa2048, seed}).samples.back();
        const auto& ec = runs.at(RunKey{3, Algorithm::EcdsaP256, seed}).samples.back();
        if (!(rsa.repo_bytes_total > ec.repo_bytes_total)) pass = false;
        if (seed == 1) {
            rsa1 = rsa.repo_bytes_total / 40;
            ec1 = ec.repo_bytes_total / 40;
        }
    }
    report(7, pass, "RSA repositories outweigh ECDSA at equal topology",
           format("seed1 mean repo bytes: rsa=%llu ecdsa=%llu", (unsigned long long)rsa1,
                  (unsigned long long)ec1));
}

void criterion_8(const std::map<RunKey, sim::MetricsLog>& runs) {
    bool pass = true;
    double r1 = 0, r3 = 0;
    for (uint64_t seed = 1; seed <= 5; seed++) {
        for (uint32_t degree : {1u, 2u, 3u}) {
            const auto& log = runs.at(RunKey{degree, Algorithm::EcdsaP256, seed});
            for (const auto& s : log.samples)
                if (s.verify_ops < s.sign_ops) pass = false;
        }
        const auto& deg1 = runs.at(RunKey{1, Algorithm::EcdsaP256, seed}).samples.back();
        const auto& deg3 = runs.at(RunKey{3, Algorithm::EcdsaP256, seed}).samples.back();
        double ratio1 = static_cast<double>(deg1.verify_ops) / deg1.sign_ops;
        double ratio3 = static_cast<double>(deg3.verify_ops) / deg3.sign_ops;
        if (!(ratio3 > ratio1)) pass = false;
        if (seed == 1) {
            r1 = ratio1;
            r3 = ratio3;
        }
    }
    report(8, pass, "verification dominates and grows with degree",
           format("seed1 verify/sign: deg1=%.2f deg3=%.2f", r1, r3));
}

void criterion_9() {
    auto start = Clock::now();
    const uint32_t reps = 15;
    struct Timing {
        double keygen_ms = 0, sign_ms = 0, verify_ms = 0;
        uint64_t valid = 0, invalid = 0;
    };
    std::map<Algorithm, Timing> results;

    for (Algorithm algo : {Algorithm::Rsa2048, Algorithm::EcdsaP256}) {
        Timing& t = results[algo];
        for (uint32_t rep = 0; rep < reps; rep++) {
            auto t0 = Clock::now();
            DeviceKeyPair kp1 = generate_keypair(algo);
            DeviceKeyPair kp2 = generate_keypair(algo);
            t.keygen_ms += seconds_since(t0) * 1000.0;

            Bytes seed = to_bytes("acceptance-bench:");
            seed.push_back(static_cast<uint8_t>(rep));
            DigestStream stream(seed);
            std::vector<Bytes> payloads;
            for (int i = 0; i < 1200; i++) payloads.push_back(stream.take(100));

            std::vector<Bytes> sigs;
            auto t1 = Clock::now();
            for (int i = 0; i < 1000; i++)
                sigs.push_back(sign_payload(kp1.handle(), payloads[i], nullptr));
            for (int i = 1000; i < 1200; i++)
                sigs.push_back(sign_payload(kp2.handle(), payloads[i], nullptr));
            t.sign_ms += seconds_since(t1) * 1000.0;

            auto t2 = Clock::now();
            for (int i = 0; i < 1200; i++) {
                bool ok = verify_with_key(kp1.handle(), payloads[i], sigs[i]);
                if (i < 1000 && ok) t.valid++;
                if (i >= 1000 && !ok) t.invalid++;
            }
            t.verify_ms += seconds_since(t2) * 1000.0;
        }
    }

    const Timing& rsa = results[Algorithm::Rsa2048];
    const Timing& ec = results[Algorithm::EcdsaP256];
    double elapsed = seconds_since(start);
    bool counts_ok = rsa.valid == 1000ull * reps && rsa.invalid == 200ull * reps &&
                     ec.valid == 1000ull * reps && ec.invalid == 200ull * reps;
    bool order_ok = ec.keygen_ms < rsa.keygen_ms && ec.sign_ms < rsa.sign_ms &&
                    rsa.verify_ms < ec.verify_ms;
    report(9, counts_ok && order_ok && elapsed < 300.0,
           "ECDSA wins keygen+sign, RSA wins verify, zero correctness errors",
           format("keygen rsa=%.0fms ec=%.1fms | sign rsa=%.2f ec=%.3f | verify rsa=%.3f "
                  "ec=%.3f per-op ms | %.0fs",
                  rsa.keygen_ms / (2 * reps), ec.keygen_ms / (2 * reps),
                  rsa.sign_ms / (1200.0 * reps), ec.sign_ms / (1200.0 * reps),
                  rsa.verify_ms / (1200.0 * reps), ec.verify_ms / (1200.0 * reps), elapsed));
}

void criterion_10() {
    sim::SimConfig config = desk_scenario(3, Algorithm::EcdsaP256, 1);
    config.duration_s = 1800;  // identical twice is what matters
    sim::MetricsLog a = sim::run(config, test_calibration());
    sim::MetricsLog b = sim::run(config, test_calibration());
    bool pass = a.to_csv() == b.to_csv();

#ifdef SOL_CLI_PATH
    // End to end through the CLI as well.
    TempDir dir("acceptance_det");
    std::filesystem::path calib = dir.path / "calibration.txt";
    test_calibration().save(calib);
    std::string base = std::string(SOL_CLI_PATH) +
                       " sim --nodes 12 --width 500 --height 500 --range 25 --duration 300"
                       " --seed 9 --calibration " +
                       calib.string() + " --out ";
    std::string out1 = (dir.path / "a.csv").string();
    std::string out2 = (dir.path / "b.csv").string();
    if (std::system((base + out1 + " > /dev/null 2>&1").c_str()) != 0) pass = false;
    if (std::system((base + out2 + " > /dev/null 2>&1").c_str()) != 0) pass = false;
    std::ifstream f1(out1), f2(out2);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    if (s1.str().empty() || s1.str() != s2.str()) pass = false;
#endif
    report(10, pass, "identical flags and seed give byte-identical CSV output", "library + CLI");
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();

    double max_wall = 0;
    auto runs = run_desk_matrix(&max_wall);
    bool wall_ok = max_wall < 60.0;
    std::printf("      desk matrix: 20 runs (40 nodes, 1000x1000 m, 7200 s), slowest %.1fs %s\n",
                max_wall, wall_ok ? "" : "(over budget!)");
    if (!wall_ok) g_failures++;

    criterion_5(runs);
    criterion_6(runs);
    criterion_7(runs);
    criterion_8(runs);
    criterion_9();
    criterion_10();

    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
}
