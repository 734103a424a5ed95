#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "sol/keystore.hpp"
#include "sol/trust_graph.hpp"

using sol::testing::TempDir;

namespace {

struct CommandResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

CommandResult run_command(const std::string& cmd) {
    CommandResult result;
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buffer[4096];
    while (size_t n = fread(buffer, 1, sizeof buffer, pipe)) result.output.append(buffer, n);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kCli = SOL_CLI_PATH;

std::string calibration_flag() {
    static TempDir dir("cli_calib");
    static bool written = false;
    static std::filesystem::path path = dir.path / "calibration.txt";
    if (!written) {
        sol::testing::test_calibration().save(path);
        written = true;
    }
    return " --calibration " + path.string();
}

}  // namespace

TEST_CASE("sim runs are deterministic and summarized") {
    TempDir dir("cli_sim");
    std::string base = std::string(kCli) +
                       " sim --nodes 8 --width 400 --height 400 --range 25 --duration 300" +
                       " --seed 1" + calibration_flag();
    CommandResult r1 = run_command(base + " --out " + (dir.path / "a.csv").string());
    CAPTURE(r1.output);
    CHECK(r1.exit_code == 0);
    CHECK(r1.output.find("relations:") != std::string::npos);
    CommandResult r2 = run_command(base + " --out " + (dir.path / "b.csv").string());
    CHECK(r2.exit_code == 0);

    std::string a = read_file(dir.path / "a.csv");
    std::string b = read_file(dir.path / "b.csv");
    CHECK(!a.empty());
    CHECK(a == b);

    // Golden header (degree 3 default).
    std::istringstream first_line(a);
    std::string header;
    std::getline(first_line, header);
    CHECK(header ==
          "time_s,direct_total,known_d2,known_d3,handshake_bytes,sync_query_bytes,"
          "sync_response_bytes,total_bytes,sign_ops,verify_ops,repo_bytes_mean,repo_bytes_max,"
          "aborted_transfers,buffer_rejections");
}

TEST_CASE("sim batch mode writes one CSV per seed") {
    TempDir dir("cli_batch");
    std::string cmd = std::string(kCli) +
                      " sim --nodes 6 --width 300 --height 300 --range 25 --duration 120" +
                      " --seeds 1-3 --out " + (dir.path / "run_{seed}.csv").string() +
                      calibration_flag();
    CommandResult r = run_command(cmd);
    CAPTURE(r.output);
    CHECK(r.exit_code == 0);
    for (int seed = 1; seed <= 3; seed++)
        CHECK(std::filesystem::exists(dir.path / ("run_" + std::to_string(seed) + ".csv")));
}

TEST_CASE("invalid sim flags exit nonzero with a message") {
    CommandResult r = run_command(std::string(kCli) + " sim --nodes 0" + calibration_flag());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("num_nodes") != std::string::npos);

    CommandResult usage = run_command(std::string(kCli) + " sim --no-such-flag");
    CHECK(usage.exit_code == 1);
}

TEST_CASE("bench smoke run verifies all counts") {
    CommandResult r =
        run_command(std::string(kCli) + " bench --algo ecdsa_p256 --reps 2 --seed 7");
    CAPTURE(r.output);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("2000/2000") != std::string::npos);
    CHECK(r.output.find("400/400") != std::string::npos);
}

TEST_CASE("repo show and verify on a persisted repository") {
    TempDir dir("cli_repo");
    sol::CryptoCounters counters;
    sol::RealVerifier verifier(&counters);
    sol::KeyPairIdentity owner(sol::generate_keypair(sol::Algorithm::EcdsaP256, 71), &counters);
    sol::KeyPairIdentity peer(sol::generate_keypair(sol::Algorithm::EcdsaP256, 72), &counters);
    sol::TrustConfig config;
    sol::TrustRepository repo(owner.public_key(), config, &verifier);
    repo.merge({peer.public_key(), sol::make_certificate(owner, peer.public_key(), 10)});
    sol::DeviceKeyPair app = sol::generate_keypair(sol::Algorithm::EcdsaP256, 73);
    repo.merge({sol::make_subkey_certificate(owner, app.public_key(), "demo", 11)});
    auto repo_dir = dir.path / "repo";
    repo.persist(repo_dir);

    CommandResult show = run_command(std::string(kCli) + " repo show " + repo_dir.string());
    CAPTURE(show.output);
    CHECK(show.exit_code == 0);
    CHECK(show.output.find("owner") != std::string::npos);
    CHECK(show.output.find("trusted") != std::string::npos);
    CHECK(show.output.find("ultimate") != std::string::npos);
    CHECK(show.output.find("demo") != std::string::npos);

    CommandResult verify = run_command(std::string(kCli) + " repo verify " + repo_dir.string());
    CAPTURE(verify.output);
    CHECK(verify.exit_code == 0);
    CHECK(verify.output.find("FAIL") == std::string::npos);
    CHECK(verify.output.find("repository OK") != std::string::npos);

    // Flip a byte in the peer certificate file; verify must flag exactly
    // that file.
    auto cert_file = repo_dir / sol::fingerprint(peer.public_key()).hex() /
                     ("cert_" + sol::fingerprint(owner.public_key()).hex() + ".b64");
    REQUIRE(std::filesystem::exists(cert_file));
    std::string content = read_file(cert_file);
    content[content.size() / 2] = content[content.size() / 2] == 'A' ? 'B' : 'A';
    {
        std::ofstream out(cert_file, std::ios::trunc);
        out << content;
    }
    CommandResult tampered = run_command(std::string(kCli) + " repo verify " + repo_dir.string());
    CAPTURE(tampered.output);
    CHECK(tampered.exit_code == 2);
    CHECK(tampered.output.find("FAIL") != std::string::npos);
    size_t fail_count = 0;
    for (size_t pos = 0; (pos = tampered.output.find("FAIL", pos)) != std::string::npos; pos += 4)
        fail_count++;
    CHECK(fail_count == 1);
}

TEST_CASE("calibrate writes a loadable file") {
    TempDir dir("cli_calibrate");
    auto path = dir.path / "calib.txt";
    CommandResult r = run_command(std::string(kCli) + " calibrate --out " + path.string());
    CHECK(r.exit_code == 0);
    CHECK(std::filesystem::exists(path));
    sol::sim::Calibration calib = sol::sim::Calibration::load(path);
    CHECK(calib.rsa2048.pubkey_len > calib.ecdsa_p256.pubkey_len);
    CHECK(calib.rsa2048.sig_len > calib.ecdsa_p256.sig_len);
}

TEST_CASE("loopback demo establishes mutual trust with sub-keys") {
    TempDir dir("cli_demo");
    auto dir_a = dir.path / "alpha";
    auto dir_b = dir.path / "beta";
    const int port = 46731;

    std::string listener_cmd = "printf 'y\\n' | " + std::string(kCli) + " demo --listen " +
                               std::to_string(port) + " --dir " + dir_a.string() +
                               " --pin 1234 2>&1 &";
    std::string connector_cmd = "printf 'y\\n' | " + std::string(kCli) + " demo --connect " +
                                "127.0.0.1:" + std::to_string(port) + " --dir " + dir_b.string() +
                                " --pin 5678 2>&1; rc=\\$?; wait; exit \\$rc";
    CommandResult r = run_command("sh -c \"" + listener_cmd + " sleep 0.3; " + connector_cmd + "\"");
    CAPTURE(r.output);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("handshake complete") != std::string::npos);

    // Both repositories show the peer as trusted and carry its sub-key.
    sol::RealVerifier verifier;
    auto check_repo = [&](const std::filesystem::path& node_dir) {
        sol::TrustConfig config = sol::TrustRepository::read_config(node_dir / "repo");
        sol::LoadReport loaded =
            sol::TrustRepository::load(node_dir / "repo", config, &verifier);
        REQUIRE(loaded.warnings.empty());
        size_t trusted = 0;
        for (const auto& [fp, entry] : loaded.repo.evaluate().entries) {
            if (entry.level != sol::TrustLevel::Trusted) continue;
            trusted++;
            const sol::SubjectRecord* rec = loaded.repo.find(fp);
            REQUIRE(rec != nullptr);
            CHECK(rec->subkey_certs.size() == 1);
        }
        CHECK(trusted == 1);
    };
    check_repo(dir_a);
    check_repo(dir_b);

    // Re-running the demo merges nothing new.
    CommandResult again =
        run_command("sh -c \"" + listener_cmd + " sleep 0.3; " + connector_cmd + "\"");
    CAPTURE(again.output);
    CHECK(again.exit_code == 0);
    CHECK(again.output.find("sync merged 0 items") != std::string::npos);
}

TEST_CASE("demo rejection on operator 'n' persists no certificates") {
    TempDir dir("cli_demo_n");
    auto dir_a = dir.path / "alpha";
    auto dir_b = dir.path / "beta";
    const int port = 46733;

    std::string listener_cmd = "printf 'y\\n' | " + std::string(kCli) + " demo --listen " +
                               std::to_string(port) + " --dir " + dir_a.string() +
                               " --pin 1234 2>&1 &";
    std::string connector_cmd = "printf 'n\\n' | " + std::string(kCli) + " demo --connect " +
                                "127.0.0.1:" + std::to_string(port) + " --dir " + dir_b.string() +
                                " --pin 5678 2>&1; rc=\\$?; wait; exit \\$rc";
    CommandResult r = run_command("sh -c \"" + listener_cmd + " sleep 0.3; " + connector_cmd + "\"");
    CAPTURE(r.output);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("rejected") != std::string::npos);

    sol::RealVerifier verifier;
    for (const auto& node_dir : {dir_b, dir_a}) {
        sol::TrustConfig config = sol::TrustRepository::read_config(node_dir / "repo");
        sol::LoadReport loaded =
            sol::TrustRepository::load(node_dir / "repo", config, &verifier);
        CHECK(loaded.repo.records().size() == 1);  // owner only
        for (const auto& [fp, entry] : loaded.repo.evaluate().entries)
            CHECK(entry.level != sol::TrustLevel::Trusted);
    }
}
