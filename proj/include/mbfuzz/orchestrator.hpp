// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mbfuzz/config.hpp"
#include "mbfuzz/seqgen.hpp"

namespace mbfuzz {

struct BatchReport {
    std::size_t index = 0;
    BatchStats stats;
    std::size_t completed = 0; // every message attempted
    std::size_t aborted = 0;   // truncated early
    std::size_t skipped = 0;   // never executed (early campaign stop)
    nlohmann::json failure_stats;
    std::string summary_text;
    nlohmann::json action; // {"type":"restart"} | {"type":"decision",...} | {"type":"stopped"}
    std::vector<std::uint64_t> crash_suspects;
};

struct CrashEvent {
    std::size_t batch = 0;
    std::uint64_t suspect_case_id = 0;
};

struct CampaignReport {
    std::string protocol;
    std::string endpoint;
    std::string started_at;
    std::string finished_at;
    double wall_seconds = 0.0;
    std::string stop_reason; // max-batches | crash | wall-clock | target-lost
    nlohmann::json config;
    std::vector<BatchReport> batches;
    std::vector<CrashEvent> crashes; // deduplicated events, each with its suspect case
    std::size_t restarts = 0;
    nlohmann::json token_ledger;
    std::uint64_t sequences_generated = 0;
    std::uint64_t messages_sent = 0;
    std::uint64_t completed = 0;
    std::uint64_t aborted = 0;
    std::uint64_t skipped = 0;
    std::uint64_t failures = 0;

    bool crash_found() const { return !crashes.empty(); }
    nlohmann::json to_json() const;
};

// The feedback-guided loop: propose a model, then per batch generate, encode,
// send, fold statistics, and either random-restart or apply a validated
// advisor decision before the next batch. The report is written atomically to
// config.report_path.
CampaignReport run_campaign(const CampaignConfig& config);

} // namespace mbfuzz
