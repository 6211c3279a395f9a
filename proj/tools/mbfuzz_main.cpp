// SPDX-License-Identifier: Apache-2.0
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mbfuzz/casestore.hpp"
#include "mbfuzz/config.hpp"
#include "mbfuzz/errors.hpp"
#include "mbfuzz/orchestrator.hpp"
#include "mbfuzz/prompts.hpp"
#include "mbfuzz/protocols.hpp"
#include "mbfuzz/util.hpp"

namespace {

using namespace mbfuzz;

volatile std::sig_atomic_t g_interrupted = 0;
void on_sigint(int) { g_interrupted = 1; }

int cmd_init(const std::string& protocol_arg, const std::string& dir) {
    std::string protocol = protocol_arg == "modbus" ? "MODBUS" : "MQTT";
    std::filesystem::create_directories(dir);

    CampaignConfig config;
    config.protocol = protocol;
    config.testbed.enabled = true;
    config.corpus_path = (std::filesystem::path(dir) / "corpus.jsonl").string();
    config.report_path = (std::filesystem::path(dir) / "report.json").string();
    config.candidates_path = (std::filesystem::path(dir) / "candidates.json").string();
    config.prompts_dir = (std::filesystem::path(dir) / "prompts").string();
    save_config_file(config, (std::filesystem::path(dir) / "config.json").string());

    nlohmann::json candidates{{"protocol", protocol},
                              {"candidate_states", builtin_candidates(protocol)}};
    std::ofstream out(config.candidates_path);
    out << candidates.dump(2) << '\n';

    write_default_prompts(config.prompts_dir);
    if (protocol == "MQTT")
        save_model_file(sample_mqtt_model(),
                        (std::filesystem::path(dir) / "model_example.json").string());

    std::cout << "wrote config.json, candidates.json and prompts/ under " << dir << '\n';
    return 0;
}

int cmd_fuzz(const std::string& config_path, std::optional<std::uint64_t> seed,
             const std::string& endpoint, bool use_testbed) {
    CampaignConfig config =
        config_path.empty() ? CampaignConfig{} : load_config_file(config_path);
    if (seed) config.master_seed = *seed;
    if (!endpoint.empty()) {
        config.endpoint = endpoint;
        config.testbed.enabled = false;
    }
    if (use_testbed) config.testbed.enabled = true;

    CampaignReport report = run_campaign(config);
    std::cout << "campaign finished: " << report.stop_reason << ", "
              << report.sequences_generated << " sequences, " << report.crashes.size()
              << " crash event(s); report at " << config.report_path << '\n';
    return report.crash_found() ? 1 : 0;
}

int cmd_replay(std::uint64_t case_id, const std::string& corpus, const std::string& endpoint_text,
               const std::string& config_path) {
    TimeoutPolicy policy;
    if (!config_path.empty()) policy = load_config_file(config_path).timeouts;

    auto stored = CaseStore::find(corpus, case_id);
    if (!stored) throw StoreError("unknown case id " + std::to_string(case_id));

    Endpoint endpoint = parse_endpoint(endpoint_text);
    SequenceOutcome outcome = replay_case(*stored, endpoint, policy);
    for (const auto& mo : outcome.messages)
        std::cout << mo.state << ": " << to_string(mo.outcome.cls) << '\n';
    std::cout << "crashed=" << (outcome.crashed ? "true" : "false") << '\n';
    return 0;
}

int cmd_stats(const std::string& report_path) {
    std::ifstream in(report_path);
    if (!in) throw ConfigError("cannot open report: " + report_path);
    nlohmann::json report;
    in >> report;

    std::printf("%-8s %12s %12s %12s\n", "batch", "total", "unique", "avg-length");
    for (const auto& batch : report.at("batches")) {
        std::printf("%-8zu %12llu %12llu %12.2f\n", batch.at("index").get<std::size_t>(),
                    static_cast<unsigned long long>(batch.at("total_cases").get<std::uint64_t>()),
                    static_cast<unsigned long long>(batch.at("unique_cases").get<std::uint64_t>()),
                    batch.at("avg_length").get<double>());
    }
    const auto& totals = report.at("totals");
    std::printf("%-8s %12llu\n", "total",
                static_cast<unsigned long long>(totals.at("sequences_generated").get<std::uint64_t>()));
    std::printf("crashes: %zu, restarts: %zu, stop: %s\n", report.at("crashes").size(),
                report.at("restarts").get<std::size_t>(),
                report.at("stop_reason").get<std::string>().c_str());
    return 0;
}

int cmd_tokens(const std::string& report_path) {
    std::ifstream in(report_path);
    if (!in) throw ConfigError("cannot open report: " + report_path);
    nlohmann::json report;
    in >> report;
    const auto& ledger = report.at("token_ledger");
    std::printf("calls: %llu\nprompt tokens: %llu\ncompletion tokens: %llu\ntotal tokens: %llu\n",
                static_cast<unsigned long long>(ledger.at("calls").get<std::uint64_t>()),
                static_cast<unsigned long long>(ledger.at("prompt_tokens").get<std::uint64_t>()),
                static_cast<unsigned long long>(ledger.at("completion_tokens").get<std::uint64_t>()),
                static_cast<unsigned long long>(ledger.at("total_tokens").get<std::uint64_t>()));
    for (const auto& record : ledger.at("records"))
        std::printf("  %-24s prompt=%-6llu completion=%-6llu %.2fs\n",
                    record.at("template_id").get<std::string>().c_str(),
                    static_cast<unsigned long long>(record.at("prompt_tokens").get<std::uint64_t>()),
                    static_cast<unsigned long long>(
                        record.at("completion_tokens").get<std::uint64_t>()),
                    record.at("wall_seconds").get<double>());
    return 0;
}

int cmd_testbed(const std::string& kind, std::uint16_t port, const std::vector<std::string>& off,
                bool no_restart) {
    TestbedOptions options;
    options.kind = testbed_kind_from_string(kind);
    options.port = port;
    options.auto_restart = !no_restart;
    for (const auto& name : off) {
        if (name == "ping-without-connect") options.bugs.ping_without_connect = false;
        else if (name == "zero-length-publish") options.bugs.zero_length_publish = false;
        else if (name == "short-pdu") options.bugs.short_pdu = false;
        else throw ConfigError("unknown bug name '" + name + "'");
    }

    TestbedServer server(options);
    server.start();
    std::signal(SIGINT, on_sigint);
    std::signal(SIGTERM, on_sigint);
    std::cout << "testbed (" << kind << ") listening on " << server.endpoint().str()
              << "; Ctrl-C to stop\n";
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    std::cout << "testbed stopped after " << server.crashes() << " crash(es)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"model-guided protocol fuzzer"};
    app.require_subcommand(1);

    std::string init_protocol = "mqtt";
    std::string init_dir = ".";
    auto* init = app.add_subcommand("init", "write a default config and candidate-state fixture");
    init->add_option("--protocol", init_protocol, "mqtt or modbus")
        ->check(CLI::IsMember({"mqtt", "modbus"}));
    init->add_option("--dir", init_dir, "output directory");

    std::string fuzz_config;
    std::string fuzz_endpoint;
    std::optional<std::uint64_t> fuzz_seed;
    bool fuzz_testbed = false;
    auto* fuzz = app.add_subcommand("fuzz", "run a fuzzing campaign");
    fuzz->add_option("--config", fuzz_config, "campaign config JSON");
    fuzz->add_option("--seed", fuzz_seed, "override the master seed");
    fuzz->add_option("--endpoint", fuzz_endpoint, "target host:port");
    fuzz->add_flag("--testbed", fuzz_testbed, "run against the bundled testbed");

    std::uint64_t replay_id = 0;
    std::string replay_corpus = "corpus.jsonl";
    std::string replay_endpoint;
    std::string replay_config;
    auto* replay = app.add_subcommand("replay", "re-send a stored case");
    replay->add_option("case-id", replay_id, "case id")->required();
    replay->add_option("--corpus", replay_corpus, "case store path");
    replay->add_option("--endpoint", replay_endpoint, "target host:port")->required();
    replay->add_option("--config", replay_config, "config for the timeout policy");

    std::string stats_report;
    auto* stats = app.add_subcommand("stats", "print per-batch generation metrics");
    stats->add_option("report", stats_report, "campaign report JSON")->required();

    std::string tokens_report;
    auto* tokens = app.add_subcommand("tokens", "print the advisor token ledger");
    tokens->add_option("report", tokens_report, "campaign report JSON")->required();

    std::string testbed_kind;
    std::uint16_t testbed_port = 0;
    std::vector<std::string> testbed_off;
    bool testbed_no_restart = false;
    auto* testbed = app.add_subcommand("testbed", "launch the bundled buggy target");
    testbed->add_option("protocol", testbed_kind, "mqtt, modbus or echo")
        ->required()
        ->check(CLI::IsMember({"mqtt", "modbus", "echo"}));
    testbed->add_option("--port", testbed_port, "listen port (0 = ephemeral)");
    testbed->add_option("--disable-bug", testbed_off,
                        "disable a seeded bug (ping-without-connect, zero-length-publish, short-pdu)");
    testbed->add_flag("--no-restart", testbed_no_restart, "stay down after a crash");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (init->parsed()) return cmd_init(init_protocol, init_dir);
        if (fuzz->parsed()) return cmd_fuzz(fuzz_config, fuzz_seed, fuzz_endpoint, fuzz_testbed);
        if (replay->parsed())
            return cmd_replay(replay_id, replay_corpus, replay_endpoint, replay_config);
        if (stats->parsed()) return cmd_stats(stats_report);
        if (tokens->parsed()) return cmd_tokens(tokens_report);
        if (testbed->parsed())
            return cmd_testbed(testbed_kind, testbed_port, testbed_off, testbed_no_restart);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
