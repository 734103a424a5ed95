// sol — decentralized device-to-device trust bootstrapping toolkit.
//
// Subcommands: sim (mobility simulation with metrics CSV), bench (crypto
// benchmark), repo (inspect/verify a persisted trust repository),
// demo (two-process handshake + sync over TCP), calibrate (measure the
// size-model byte lengths).

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include "sol/codec.hpp"
#include "sol/errors.hpp"
#include "sol/keystore.hpp"
#include "sol/message.hpp"
#include "sol/protocol.hpp"
#include "sol/sim/engine.hpp"
#include "sol/trust_graph.hpp"

#include "tcp.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// ---- sim ----------------------------------------------------------------

struct SimArgs {
    std::string scenario;
    std::string out = "metrics.csv";
    std::string calibration;
    std::string seeds_range;
    sol::sim::SimConfig config;
    std::string algo;
    std::string crypto_mode;
};

sol::sim::Calibration resolve_calibration(const std::string& flag_path) {
    if (!flag_path.empty()) return sol::sim::Calibration::load(flag_path);
    fs::path fallback = "calibration.txt";
    if (fs::exists(fallback)) return sol::sim::Calibration::load(fallback);
    std::cerr << "note: no calibration file, measuring once into " << fallback.string() << "\n";
    sol::sim::Calibration calib = sol::sim::Calibration::measure();
    calib.save(fallback);
    return calib;
}

std::string seed_out_path(const std::string& pattern, uint64_t seed, bool multi) {
    std::string out = pattern;
    size_t placeholder = out.find("{seed}");
    if (placeholder != std::string::npos) {
        out.replace(placeholder, 6, std::to_string(seed));
        return out;
    }
    if (!multi) return out;
    fs::path p(out);
    fs::path stem = p.stem();
    fs::path ext = p.extension();
    return (p.parent_path() / (stem.string() + "_seed" + std::to_string(seed) + ext.string()))
        .string();
}

void print_sim_summary(const sol::sim::SimConfig& config, const sol::sim::MetricsLog& log,
                       const std::string& csv_path) {
    const sol::sim::MetricsSample& last = log.samples.back();
    std::cout << "seed=" << config.seed << " degree=" << config.trust.maxdegree
              << " algo=" << sol::algorithm_name(config.trust.signaturealgorithm)
              << " mode=" << sol::sim::crypto_mode_name(config.crypto_mode)
              << " relations: direct=" << last.direct_total << " known=" << last.known_total()
              << " bytes: handshake=" << last.handshake_bytes
              << " sync=" << last.sync_query_bytes + last.sync_response_bytes
              << " (query=" << last.sync_query_bytes << " response=" << last.sync_response_bytes
              << ") ops: sign=" << last.sign_ops << " verify=" << last.verify_ops
              << " csv=" << csv_path << "\n";
}

// Scenario file first, explicit flags on top.
int cmd_sim(const SimArgs& args, const std::vector<std::function<void(sol::sim::SimConfig&)>>&
                                     flag_overrides) {
    sol::sim::SimConfig config;
    if (!args.scenario.empty()) config = sol::sim::parse_scenario_file(args.scenario);
    for (const auto& apply : flag_overrides) apply(config);
    if (!args.algo.empty()) config.trust.signaturealgorithm = sol::algorithm_from_name(args.algo);
    if (!args.crypto_mode.empty())
        config.crypto_mode = sol::sim::crypto_mode_from_name(args.crypto_mode);
    config.validate();

    // Real-crypto runs never touch the calibration table.
    sol::sim::Calibration calib;
    if (config.crypto_mode == sol::sim::CryptoMode::SizeModel)
        calib = resolve_calibration(args.calibration);

    std::vector<uint64_t> seeds;
    if (!args.seeds_range.empty()) {
        size_t dash = args.seeds_range.find('-');
        if (dash == std::string::npos)
            throw sol::InvalidConfig("--seeds expects A-B, e.g. 1-5");
        uint64_t lo = std::stoull(args.seeds_range.substr(0, dash));
        uint64_t hi = std::stoull(args.seeds_range.substr(dash + 1));
        if (hi < lo) throw sol::InvalidConfig("--seeds range is inverted");
        for (uint64_t s = lo; s <= hi; s++) seeds.push_back(s);
    } else {
        seeds.push_back(config.seed);
    }

    std::mutex io_mutex;
    std::vector<std::thread> workers;
    std::atomic<bool> failed{false};
    size_t parallel = std::min<size_t>(seeds.size(), std::thread::hardware_concurrency());
    std::atomic<size_t> next{0};
    for (size_t w = 0; w < std::max<size_t>(parallel, 1); w++) {
        workers.emplace_back([&]() {
            for (;;) {
                size_t idx = next.fetch_add(1);
                if (idx >= seeds.size() || failed) return;
                sol::sim::SimConfig run_config = config;
                run_config.seed = seeds[idx];
                try {
                    sol::sim::MetricsLog log = sol::sim::run(run_config, calib);
                    std::string path =
                        seed_out_path(args.out, run_config.seed, seeds.size() > 1);
                    sol::sim::export_metrics(log, path);
                    std::lock_guard<std::mutex> lock(io_mutex);
                    print_sim_summary(run_config, log, path);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(io_mutex);
                    std::cerr << "error: seed " << run_config.seed << ": " << e.what() << "\n";
                    failed = true;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    return failed ? 2 : 0;
}

// ---- bench --------------------------------------------------------------

struct BenchRow {
    sol::Algorithm algorithm;
    uint32_t reps = 0;
    double keygen_ms_per_pair = 0;
    double sign_ms_per_op = 0;
    double verify_ms_per_op = 0;
    uint64_t valid_verified = 0;
    uint64_t invalid_rejected = 0;
};

BenchRow run_bench(sol::Algorithm algo, uint32_t reps, uint64_t seed) {
    BenchRow row;
    row.algorithm = algo;
    row.reps = reps;
    double keygen_ms = 0, sign_ms = 0, verify_ms = 0;

    for (uint32_t rep = 0; rep < reps; rep++) {
        auto t0 = Clock::now();
        sol::DeviceKeyPair kp1 = sol::generate_keypair(algo);
        sol::DeviceKeyPair kp2 = sol::generate_keypair(algo);
        keygen_ms += ms_since(t0);

        // 1200 fixed-size payloads; kp1 signs the first 1000, kp2 the
        // remaining 200 (those signatures must not verify under kp1).
        sol::Bytes seed_bytes = sol::to_bytes("bench-payloads:");
        for (int shift = 56; shift >= 0; shift -= 8)
            seed_bytes.push_back(static_cast<uint8_t>((seed + rep) >> shift));
        sol::DigestStream stream(seed_bytes);
        std::vector<sol::Bytes> payloads;
        payloads.reserve(1200);
        for (int i = 0; i < 1200; i++) payloads.push_back(stream.take(100));

        std::vector<sol::Bytes> sigs;
        sigs.reserve(1200);
        auto t1 = Clock::now();
        for (int i = 0; i < 1000; i++)
            sigs.push_back(sol::sign_payload(kp1.handle(), payloads[i], nullptr));
        for (int i = 1000; i < 1200; i++)
            sigs.push_back(sol::sign_payload(kp2.handle(), payloads[i], nullptr));
        sign_ms += ms_since(t1);

        auto t2 = Clock::now();
        for (int i = 0; i < 1200; i++) {
            bool ok = sol::verify_with_key(kp1.handle(), payloads[i], sigs[i]);
            if (i < 1000 && ok) row.valid_verified++;
            if (i >= 1000 && !ok) row.invalid_rejected++;
        }
        verify_ms += ms_since(t2);
    }

    row.keygen_ms_per_pair = keygen_ms / (2.0 * reps);
    row.sign_ms_per_op = sign_ms / (1200.0 * reps);
    row.verify_ms_per_op = verify_ms / (1200.0 * reps);
    return row;
}

int cmd_bench(const std::string& algo_flag, uint32_t reps, uint64_t seed,
              const std::string& out) {
    std::vector<sol::Algorithm> algos;
    if (algo_flag == "both") {
        algos = {sol::Algorithm::Rsa2048, sol::Algorithm::EcdsaP256};
    } else {
        algos = {sol::algorithm_from_name(algo_flag)};
    }

    std::vector<BenchRow> rows;
    for (sol::Algorithm algo : algos) rows.push_back(run_bench(algo, reps, seed));

    std::cout << "algorithm   reps  keygen_ms/pair  sign_ms/op  verify_ms/op  valid  invalid_rejected\n";
    char line[256];
    bool correct = true;
    for (const BenchRow& r : rows) {
        std::snprintf(line, sizeof line,
                      "%-10s  %4u  %14.3f  %10.4f  %12.4f  %5llu/%-5u %5llu/%u\n",
                      std::string(sol::algorithm_name(r.algorithm)).c_str(), r.reps,
                      r.keygen_ms_per_pair, r.sign_ms_per_op, r.verify_ms_per_op,
                      static_cast<unsigned long long>(r.valid_verified), 1000u * r.reps,
                      static_cast<unsigned long long>(r.invalid_rejected), 200u * r.reps);
        std::cout << line;
        if (r.valid_verified != 1000ull * r.reps || r.invalid_rejected != 200ull * r.reps)
            correct = false;
    }
    if (!out.empty()) {
        std::ofstream csv(out, std::ios::trunc);
        if (!csv) throw sol::IoError("cannot write " + out);
        csv << "algorithm,reps,keygen_ms_per_pair,sign_ms_per_op,verify_ms_per_op,"
               "valid_verified,invalid_rejected\n";
        for (const BenchRow& r : rows)
            csv << sol::algorithm_name(r.algorithm) << ',' << r.reps << ','
                << r.keygen_ms_per_pair << ',' << r.sign_ms_per_op << ',' << r.verify_ms_per_op
                << ',' << r.valid_verified << ',' << r.invalid_rejected << "\n";
    }
    if (!correct) {
        std::cerr << "error: verification correctness check failed\n";
        return 2;
    }
    return 0;
}

// ---- repo ---------------------------------------------------------------

int cmd_repo_show(const fs::path& dir) {
    sol::TrustConfig config = sol::TrustRepository::read_config(dir);
    sol::RealVerifier verifier;
    sol::LoadReport loaded = sol::TrustRepository::load(dir, config, &verifier);
    for (const std::string& warning : loaded.warnings)
        std::cerr << "warning: " << warning << "\n";

    sol::TrustAssessment assessment = loaded.repo.evaluate();
    std::cout << "repository " << dir.string() << " (maxdegree=" << config.maxdegree
              << " numknown=" << config.numknown << ")\n";
    for (const auto& [fp, rec] : loaded.repo.records()) {
        auto entry_level = assessment.level(fp);
        std::cout << (fp == loaded.repo.owner_fp() ? "owner   " : "subject ") << fp.hex()
                  << "\n  keyid " << sol::key_id(rec.key).hex() << "  level "
                  << sol::trust_level_name(entry_level);
        if (entry_level != sol::TrustLevel::Unknown)
            std::cout << "  depth " << assessment.depth(fp);
        std::cout << "\n";
        for (const auto& [issuer, cert] : rec.certificates)
            std::cout << "  cert from " << issuer.hex().substr(0, 16) << "…  issued_at "
                      << cert.issued_at << "\n";
        for (const auto& [skfp, skc] : rec.subkey_certs)
            std::cout << "  subkey " << skfp.hex().substr(0, 16) << "…  app \"" << skc.app_tag
                      << "\"\n";
    }
    return 0;
}

int cmd_repo_verify(const fs::path& dir) {
    sol::TrustConfig config = sol::TrustRepository::read_config(dir);
    sol::RealVerifier verifier;
    sol::LoadReport loaded = sol::TrustRepository::load(dir, config, &verifier);

    size_t failed = 0;
    for (const std::string& warning : loaded.warnings) {
        std::cout << "FAIL " << warning << "\n";
        failed++;
    }
    for (const auto& [fp, rec] : loaded.repo.records()) {
        std::string prefix = fp.hex();
        std::cout << "PASS " << prefix.substr(0, 8) << "/pubkey.b64\n";
        for (const auto& [issuer, cert] : rec.certificates)
            std::cout << "PASS " << prefix.substr(0, 8) << "/cert_" << issuer.hex().substr(0, 8)
                      << "….b64\n";
        for (const auto& [skfp, skc] : rec.subkey_certs) {
            // Cross-check the sub-key file against the signed certificate.
            fs::path key_file = dir / prefix / ("subkey_" + skfp.hex() + ".b64");
            bool ok = false;
            try {
                std::ifstream in(key_file);
                std::string b64((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
                ok = in.good() || in.eof();
                ok = ok && sol::base64_decode(b64) == skc.subkey.encoded();
            } catch (const std::exception&) {
                ok = false;
            }
            std::cout << (ok ? "PASS " : "FAIL ") << prefix.substr(0, 8) << "/subkey_"
                      << skfp.hex().substr(0, 8) << "….b64\n";
            if (!ok) failed++;
            std::cout << "PASS " << prefix.substr(0, 8) << "/subkeycert_"
                      << skfp.hex().substr(0, 8) << "….b64\n";
        }
    }
    std::cout << (failed == 0 ? "repository OK" : "repository has failures") << " ("
              << loaded.repo.records().size() << " subjects, " << failed << " failures)\n";
    return failed == 0 ? 0 : 2;
}

// ---- demo ---------------------------------------------------------------

// The operator is the out-of-band channel: both terminals print their
// fingerprints and each user confirms the remote one matches.
class PromptOoBVerifier : public sol::OoBVerifier {
public:
    bool verify(const sol::Fingerprint& local, const sol::Fingerprint&,
                const sol::Fingerprint& received) const override {
        std::cout << "local fingerprint   " << local.hex() << "\n";
        std::cout << "remote fingerprint  " << received.hex() << "\n";
        std::cout << "Does the remote fingerprint match the peer's display? [y/n] " << std::flush;
        std::string answer;
        if (!std::getline(std::cin, answer)) return false;
        return !answer.empty() && (answer[0] == 'y' || answer[0] == 'Y');
    }
};

sol::Message read_message(TcpStream& stream) {
    sol::Bytes header = stream.recv_exact(sol::kMessageHeaderBytes);
    uint32_t len = 0;
    for (int i = 2; i < 6; i++) len = len << 8 | header[i];
    sol::Bytes payload = stream.recv_exact(len);
    header.insert(header.end(), payload.begin(), payload.end());
    return sol::decode_message(header);
}

int cmd_demo(uint16_t listen_port, const std::string& connect_to, const std::string& pin,
             const fs::path& dir, const std::string& algo_name) {
    fs::create_directories(dir);
    fs::path store_path = dir / "keystore.b64";
    fs::path repo_path = dir / "repo";
    sol::Algorithm algo = sol::algorithm_from_name(algo_name);

    // Keystore: create on first run, unlock afterwards.
    std::optional<sol::SoftwareKeystore> store;
    if (fs::exists(store_path)) {
        store = sol::SoftwareKeystore::open(store_path);
        store->unlock(pin);
    } else {
        std::cout << "creating keystore " << store_path.string() << "\n";
        store = sol::SoftwareKeystore::create(store_path, pin, algo);
    }

    sol::RealVerifier verifier;
    sol::TrustConfig config;
    config.signaturealgorithm = algo;
    std::optional<sol::TrustRepository> repo;
    if (fs::exists(repo_path / "repo.meta")) {
        config = sol::TrustRepository::read_config(repo_path);
        sol::LoadReport loaded = sol::TrustRepository::load(repo_path, config, &verifier);
        for (const std::string& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
        repo.emplace(std::move(loaded.repo));
    } else {
        repo.emplace(store->public_key(), config, &verifier);
    }

    // One demo sub-key per device, registered before the exchange so it
    // propagates with our record.
    bool has_demo_subkey = false;
    for (const auto& [skfp, skc] : repo->find(repo->owner_fp())->subkey_certs)
        if (skc.app_tag == "demo") has_demo_subkey = true;
    if (!has_demo_subkey) {
        sol::DeviceKeyPair app_key = sol::generate_keypair(algo);
        uint64_t now = static_cast<uint64_t>(::time(nullptr));
        sol::SubKeyCertificate skc =
            store->register_subkey(app_key.public_key(), "demo", now, config.maxsubkeys);
        repo->merge({skc});
        std::cout << "registered demo sub-key " << sol::fingerprint(skc.subkey).hex().substr(0, 16)
                  << "…\n";
    }
    repo->persist(repo_path);

    // Transport.
    bool listening = connect_to.empty();
    TcpStream stream = listening ? tcp_listen_accept(listen_port) : tcp_connect(connect_to);
    std::cout << (listening ? "accepted connection\n" : "connected\n");

    uint64_t now = static_cast<uint64_t>(::time(nullptr));
    PromptOoBVerifier oob;
    sol::NodeContext self{*store, *repo};
    sol::HandshakeSession session(self, oob, now);

    bool already_trusted = false;
    sol::Message offer = session.start();
    stream.send(sol::encode_message(offer));
    session.on_key_offer(read_message(stream));
    sol::Fingerprint peer_fp = *session.peer_fingerprint();
    already_trusted = repo->evaluate().level(peer_fp) == sol::TrustLevel::Trusted;

    // The human comparison stands in for the presented fingerprint.
    sol::Message cert_msg = session.confirm_oob(peer_fp);
    stream.send(sol::encode_message(cert_msg));
    session.on_certificate(read_message(stream));
    std::cout << "handshake complete, peer "
              << (already_trusted ? "re-confirmed as trusted" : "is now trusted") << "\n";

    // One synchronization in each direction; the listener answers first.
    auto respond_once = [&]() {
        sol::Message query = read_message(stream);
        sol::SyncResponse response =
            sol::sync_build_response(*repo, std::get<sol::SyncQuery>(query));
        stream.send(sol::encode_message(sol::Message(response)));
    };
    auto request_once = [&]() {
        sol::SyncQuery query = sol::sync_build_query(*repo);
        stream.send(sol::encode_message(sol::Message(query)));
        sol::Message response = read_message(stream);
        sol::MergeReport report =
            repo->merge(sol::sync_items(std::get<sol::SyncResponse>(response)));
        std::cout << "sync merged " << report.accepted << " items\n";
    };
    if (listening) {
        respond_once();
        request_once();
    } else {
        request_once();
        respond_once();
    }

    repo->persist(repo_path);
    sol::TrustAssessment assessment = repo->evaluate();
    const sol::SubjectRecord* peer = repo->find(peer_fp);
    std::cout << "peer " << peer_fp.hex().substr(0, 16) << "… level "
              << sol::trust_level_name(assessment.level(peer_fp)) << ", carries "
              << (peer ? peer->subkey_certs.size() : 0) << " sub-key(s)\n";
    std::cout << "repository persisted to " << repo_path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decentralized device-to-device trust bootstrapping toolkit"};
    app.require_subcommand(1);

    // sim
    SimArgs sim_args;
    std::vector<std::function<void(sol::sim::SimConfig&)>> sim_overrides;
    std::vector<std::pair<CLI::Option*, std::function<void(sol::sim::SimConfig&)>>> sim_flags;
    CLI::App* sim = app.add_subcommand("sim", "run a mobility simulation and export metrics CSV");
    sim->add_option("--scenario", sim_args.scenario, "scenario file (key=value lines)");
    auto& cfg = sim_args.config;
    sim_flags = {
        {sim->add_option("--nodes", cfg.num_nodes, "number of nodes"),
         [&](auto& c) { c.num_nodes = cfg.num_nodes; }},
        {sim->add_option("--width", cfg.width_m, "world width [m]"),
         [&](auto& c) { c.width_m = cfg.width_m; }},
        {sim->add_option("--height", cfg.height_m, "world height [m]"),
         [&](auto& c) { c.height_m = cfg.height_m; }},
        {sim->add_option("--duration", cfg.duration_s, "simulated seconds"),
         [&](auto& c) { c.duration_s = cfg.duration_s; }},
        {sim->add_option("--degree", cfg.trust.maxdegree, "maximum trust degree"),
         [&](auto& c) { c.trust.maxdegree = cfg.trust.maxdegree; }},
        {sim->add_option("--numknown", cfg.trust.numknown, "known-issuer quorum"),
         [&](auto& c) { c.trust.numknown = cfg.trust.numknown; }},
        {sim->add_option("--maxsubkeys", cfg.trust.maxsubkeys, "sub-keys per node"),
         [&](auto& c) { c.trust.maxsubkeys = cfg.trust.maxsubkeys; }},
        {sim->add_option("--seed", cfg.seed, "RNG seed"),
         [&](auto& c) { c.seed = cfg.seed; }},
        {sim->add_option("--range", cfg.tx_range_m, "transmission range [m]"),
         [&](auto& c) { c.tx_range_m = cfg.tx_range_m; }},
        {sim->add_option("--rate", cfg.tx_rate_bps, "transmit rate [bit/s]"),
         [&](auto& c) { c.tx_rate_bps = cfg.tx_rate_bps; }},
        {sim->add_option("--buffer", cfg.buffer_bytes, "repository byte cap per node"),
         [&](auto& c) { c.buffer_bytes = cfg.buffer_bytes; }},
        {sim->add_option("--interval", cfg.sync_interval_s, "sync interval [s]"),
         [&](auto& c) { c.sync_interval_s = cfg.sync_interval_s; }},
        {sim->add_option("--speed-min", cfg.speed_min_mps, "minimum speed [m/s]"),
         [&](auto& c) { c.speed_min_mps = cfg.speed_min_mps; }},
        {sim->add_option("--speed-max", cfg.speed_max_mps, "maximum speed [m/s]"),
         [&](auto& c) { c.speed_max_mps = cfg.speed_max_mps; }},
        {sim->add_option("--step", cfg.step_s, "time step [s]"),
         [&](auto& c) { c.step_s = cfg.step_s; }},
    };
    sim->add_option("--algo", sim_args.algo, "rsa2048 | ecdsa_p256");
    sim->add_option("--crypto-mode", sim_args.crypto_mode, "real | size_model");
    sim->add_option("--seeds", sim_args.seeds_range, "seed range A-B, one run per seed");
    sim->add_option("--out", sim_args.out, "output CSV path ({seed} placeholder allowed)");
    sim->add_option("--calibration", sim_args.calibration, "size-model calibration file");

    // bench
    std::string bench_algo = "both";
    uint32_t bench_reps = 15;
    uint64_t bench_seed = 1;
    std::string bench_out;
    CLI::App* bench = app.add_subcommand("bench", "benchmark key generation, signing, verifying");
    bench->add_option("--algo", bench_algo, "rsa2048 | ecdsa_p256 | both");
    bench->add_option("--reps", bench_reps, "repetitions")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bench_seed, "payload seed");
    bench->add_option("--out", bench_out, "optional CSV output");

    // repo
    std::string repo_dir;
    CLI::App* repo = app.add_subcommand("repo", "inspect a persisted trust repository");
    CLI::App* repo_show = repo->add_subcommand("show", "list subjects, levels and certificates");
    repo_show->add_option("dir", repo_dir, "repository directory")->required();
    CLI::App* repo_verify = repo->add_subcommand("verify", "re-check every stored signature");
    repo_verify->add_option("dir", repo_dir, "repository directory")->required();
    repo->require_subcommand(1);

    // demo
    uint16_t demo_port = 0;
    std::string demo_connect;
    std::string demo_pin;
    std::string demo_dir = "demo-node";
    std::string demo_algo = "ecdsa_p256";
    CLI::App* demo = app.add_subcommand("demo", "two-party handshake and sync over TCP");
    CLI::Option* listen_opt = demo->add_option("--listen", demo_port, "listen on port");
    CLI::Option* connect_opt = demo->add_option("--connect", demo_connect, "connect to host:port");
    demo->add_option("--pin", demo_pin, "keystore PIN")->required();
    demo->add_option("--dir", demo_dir, "node state directory");
    demo->add_option("--algo", demo_algo, "rsa2048 | ecdsa_p256 (first run only)");
    listen_opt->excludes(connect_opt);

    // calibrate
    std::string calib_out = "calibration.txt";
    CLI::App* calibrate = app.add_subcommand("calibrate", "measure size-model byte lengths");
    calibrate->add_option("--out", calib_out, "calibration file to write");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    for (const auto& [option, apply] : sim_flags)
        if (option->count() > 0) sim_overrides.push_back(apply);

    try {
        if (sim->parsed()) return cmd_sim(sim_args, sim_overrides);
        if (bench->parsed()) return cmd_bench(bench_algo, bench_reps, bench_seed, bench_out);
        if (repo->parsed())
            return repo_show->parsed() ? cmd_repo_show(repo_dir) : cmd_repo_verify(repo_dir);
        if (demo->parsed()) {
            if (demo_port == 0 && demo_connect.empty())
                throw sol::InvalidConfig("demo needs --listen or --connect");
            return cmd_demo(demo_port, demo_connect, demo_pin, demo_dir, demo_algo);
        }
        if (calibrate->parsed()) {
            sol::sim::Calibration calib = sol::sim::Calibration::measure();
            calib.save(calib_out);
            std::cout << "calibration written to " << calib_out << "\n";
            return 0;
        }
    } catch (const sol::OoBRejected& e) {
        std::cerr << "rejected: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
