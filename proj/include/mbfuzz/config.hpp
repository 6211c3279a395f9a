// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "mbfuzz/advisor.hpp"
#include "mbfuzz/backend.hpp"
#include "mbfuzz/harness.hpp"
#include "mbfuzz/mutate.hpp"
#include "mbfuzz/testbed.hpp"

namespace mbfuzz {

struct AdvisorConfig {
    std::string backend = "heuristic"; // heuristic | llm | mock
    HeuristicThresholds heuristic;
    LlmBackend::Options llm;
    std::vector<std::string> mock_replies;   // inline script
    std::string mock_replies_path;           // or a JSON-array fixture file
    bool augment_candidates = false;
    std::size_t candidate_cap = 32;
    double temperature = 0.5;
};

struct BudgetConfig {
    std::uint64_t max_tokens = 200'000;
    std::uint64_t max_calls = 256;
    double wall_clock_seconds = 3600;
};

struct TestbedConfig {
    bool enabled = false;
    std::string kind; // mqtt | modbus | echo; empty = follow protocol
    TestbedBugs bugs;
    bool auto_restart = true;
    int restart_delay_ms = 700;
};

struct CampaignConfig {
    std::string protocol = "MQTT"; // MQTT | MODBUS
    std::string endpoint;          // host:port; ignored when the testbed is used
    TestbedConfig testbed;

    std::size_t batch_size = 20'000;
    std::size_t max_batches = 5;
    std::size_t state_count = 7;
    double restart_probability = 0.1;
    std::uint64_t master_seed = 1;
    bool stop_on_crash = false;
    int workers = 4;

    AdvisorConfig advisor;
    BudgetConfig budget;
    MutationConfig mutation;
    TimeoutPolicy timeouts;
    double modbus_truncate_probability = 0.25;

    std::string corpus_path = "corpus.jsonl";
    std::string report_path = "report.json";
    std::string candidates_path; // optional; built-in fixture otherwise
    std::string prompts_dir;     // optional prompt template overrides
    std::string batch_export_dir; // optional per-batch JSONL dumps
};

CampaignConfig config_from_json(const nlohmann::json& doc); // throws ConfigError
nlohmann::json config_to_json(const CampaignConfig& config);

CampaignConfig load_config_file(const std::string& path);
void save_config_file(const CampaignConfig& config, const std::string& path);

// Range checks (probabilities, batch_size >= 1, ...); throws ConfigError.
void validate_config(const CampaignConfig& config);

} // namespace mbfuzz
