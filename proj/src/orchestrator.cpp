// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include "mbfuzz/casestore.hpp"
#include "mbfuzz/errors.hpp"
#include "mbfuzz/payload.hpp"
#include "mbfuzz/protocols.hpp"
#include "mbfuzz/util.hpp"

namespace mbfuzz {

namespace {

constexpr std::uint64_t kRestartStreamTag = 1;
constexpr std::uint64_t kEncodeStreamTag = 2;
constexpr std::uint64_t kBatchStreamBase = 1000;

std::vector<std::string> load_candidates(const CampaignConfig& config) {
    if (config.candidates_path.empty()) return builtin_candidates(config.protocol);
    std::ifstream in(config.candidates_path);
    if (!in) throw ConfigError("cannot open candidates file: " + config.candidates_path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad candidates file: " + std::string(e.what()));
    }
    if (doc.is_array()) return doc.get<std::vector<std::string>>();
    if (doc.is_object() && doc.contains("candidate_states"))
        return doc["candidate_states"].get<std::vector<std::string>>();
    throw ConfigError("candidates file must be an array or {\"candidate_states\": [...]}");
}

struct AdvisorBundle {
    std::unique_ptr<ChatBackend> backend;
    std::unique_ptr<Advisor> advisor;
};

AdvisorBundle make_advisor(const CampaignConfig& config) {
    AdvisorBundle bundle;
    if (config.advisor.backend == "heuristic") {
        bundle.advisor = std::make_unique<HeuristicAdvisor>(config.advisor.heuristic);
        return bundle;
    }
    if (config.advisor.backend == "mock") {
        if (!config.advisor.mock_replies_path.empty())
            bundle.backend = std::make_unique<MockBackend>(
                MockBackend::from_fixture(config.advisor.mock_replies_path));
        else
            bundle.backend = std::make_unique<MockBackend>(config.advisor.mock_replies);
    } else {
        LlmBackend::Options options = config.advisor.llm;
        options.temperature = config.advisor.temperature;
        options.log = [](const std::string& line) { std::clog << "[mbfuzz] " << line << '\n'; };
        bundle.backend = std::make_unique<LlmBackend>(std::move(options));
    }
    bundle.backend->set_budget({config.budget.max_calls, config.budget.max_tokens});
    auto templates =
        config.prompts_dir.empty() ? default_prompts() : load_prompts(config.prompts_dir);
    bundle.advisor = std::make_unique<ChatAdvisor>(*bundle.backend, std::move(templates),
                                                   config.advisor.temperature);
    return bundle;
}

bool wait_until_reachable(const Endpoint& endpoint, int budget_ms) {
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(budget_ms);
    while (std::chrono::steady_clock::now() < deadline) {
        if (TcpStream::connect(endpoint, 100)) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    return false;
}

nlohmann::json decision_json(const AdvisorDecision& decision) {
    return nlohmann::json{{"type", "decision"},
                          {"kind", to_string(decision.kind)},
                          {"state", decision.state},
                          {"reason", decision.reason}};
}

void write_report_atomically(const nlohmann::json& doc, const std::string& path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw ConfigError("cannot write report file: " + tmp);
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

} // namespace

nlohmann::json CampaignReport::to_json() const {
    nlohmann::json batch_list = nlohmann::json::array();
    for (const auto& b : batches)
        batch_list.push_back({{"index", b.index},
                              {"total_cases", b.stats.total_cases},
                              {"unique_cases", b.stats.unique_cases},
                              {"avg_length", b.stats.avg_length},
                              {"completed", b.completed},
                              {"aborted", b.aborted},
                              {"skipped", b.skipped},
                              {"failure_stats", b.failure_stats},
                              {"summary", b.summary_text},
                              {"action", b.action},
                              {"crash_suspects", b.crash_suspects}});
    nlohmann::json crash_list = nlohmann::json::array();
    for (const auto& c : crashes)
        crash_list.push_back({{"batch", c.batch}, {"suspect_case_id", c.suspect_case_id}});
    return nlohmann::json{{"protocol", protocol},
                          {"endpoint", endpoint},
                          {"started_at", started_at},
                          {"finished_at", finished_at},
                          {"wall_seconds", wall_seconds},
                          {"stop_reason", stop_reason},
                          {"config", config},
                          {"batches", std::move(batch_list)},
                          {"crashes", std::move(crash_list)},
                          {"restarts", restarts},
                          {"token_ledger", token_ledger},
                          {"totals",
                           {{"sequences_generated", sequences_generated},
                            {"messages_sent", messages_sent},
                            {"completed", completed},
                            {"aborted", aborted},
                            {"skipped", skipped},
                            {"failures", failures}}}};
}

CampaignReport run_campaign(const CampaignConfig& config) {
    validate_config(config);

    // Target: external endpoint or the bundled testbed.
    std::unique_ptr<TestbedServer> testbed;
    Endpoint endpoint;
    if (config.testbed.enabled) {
        TestbedOptions options;
        std::string kind = config.testbed.kind;
        if (kind.empty()) kind = config.protocol == "MODBUS" ? "modbus" : "mqtt";
        options.kind = testbed_kind_from_string(kind);
        options.bugs = config.testbed.bugs;
        options.auto_restart = config.testbed.auto_restart;
        options.restart_delay_ms = config.testbed.restart_delay_ms;
        testbed = std::make_unique<TestbedServer>(options);
        testbed->start();
        endpoint = testbed->endpoint();
    } else {
        endpoint = parse_endpoint(config.endpoint);
    }
    if (!probe_liveness(endpoint, config.timeouts))
        throw ConfigError("target unreachable at campaign start: " + endpoint.str());

    AdvisorBundle bundle = make_advisor(config);
    Advisor& advisor = *bundle.advisor;

    std::vector<std::string> candidates = load_candidates(config);
    if (config.advisor.augment_candidates)
        candidates =
            advisor.augment_candidates(candidates, config.protocol, config.advisor.candidate_cap);

    std::size_t k = std::min(config.state_count, candidates.size());
    SelectionResult selection = advisor.select_states(candidates, k, config.protocol);
    StateModel model = advisor.propose_model(selection, config.protocol, candidates);
    {
        ValidationReport vr = validate_model(model);
        if (!vr.ok())
            throw std::logic_error("advisor returned an invalid model: " +
                                   vr.violations.front().message);
    }
    const StateModel snapshot = model;

    CaseStore store(config.corpus_path, /*truncate=*/true);
    Rng restart_rng(derive_seed(config.master_seed, kRestartStreamTag));
    PayloadOptions payload_options{config.mutation, config.modbus_truncate_probability};

    CampaignReport report;
    report.protocol = config.protocol;
    report.endpoint = endpoint.str();
    report.config = config_to_json(config);
    report.started_at = iso8601_now();
    report.stop_reason = "max-batches";

    auto campaign_start = std::chrono::steady_clock::now();
    auto deadline =
        campaign_start + std::chrono::duration<double>(config.budget.wall_clock_seconds);

    bool stop_campaign = false;
    for (std::size_t b = 0; b < config.max_batches && !stop_campaign; ++b) {
        if (std::chrono::steady_clock::now() >= deadline) {
            report.stop_reason = "wall-clock";
            break;
        }

        // (1) generate
        std::uint64_t batch_seed = derive_seed(config.master_seed, kBatchStreamBase + b);
        std::vector<MessageSequence> batch =
            generate_batch(model, config.batch_size, batch_seed, b * config.batch_size);

        // (2) encode + mutate
        std::size_t n = batch.size();
        std::vector<std::vector<EncodedMessage>> wire(n);
        std::vector<std::size_t> lengths(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            Rng enc_rng(derive_seed(batch[i].seed, kEncodeStreamTag));
            wire[i].reserve(batch[i].states.size());
            for (const auto& state : batch[i].states) {
                wire[i].push_back(encode_state(config.protocol, state, enc_rng, payload_options));
                lengths[i] += wire[i].back().bytes.size();
            }
        }
        if (!config.batch_export_dir.empty()) {
            std::filesystem::create_directories(config.batch_export_dir);
            std::ofstream out(std::filesystem::path(config.batch_export_dir) /
                              ("batch_" + std::to_string(b) + ".jsonl"));
            write_batch_jsonl(batch, out);
        }

        // (3) send, classify, store
        std::vector<SequenceOutcome> outcomes(n);
        std::vector<char> executed(n, 0);
        std::atomic<std::size_t> cursor{0};
        std::atomic<bool> halt{false};
        std::atomic<bool> recovering{false};
        std::shared_mutex traffic_mutex;
        std::mutex recent_mutex;
        std::deque<std::size_t> recent; // indices of the last stored cases
        std::vector<std::uint64_t> suspects;
        std::string halt_reason;

        // Crash attribution: the detecting worker takes exclusive access,
        // waits for the restart, then replays recent cases newest-first; the
        // one that deterministically re-crashes the target is the suspect.
        auto confirm_crash = [&](std::size_t detector_index) {
            std::unique_lock exclusive(traffic_mutex);
            if (!wait_until_reachable(endpoint, 15000)) {
                halt.store(true);
                halt_reason = "target-lost";
                return;
            }
            std::vector<std::size_t> candidates;
            {
                std::lock_guard lock(recent_mutex);
                candidates.assign(recent.rbegin(), recent.rend());
            }
            std::uint64_t suspect = batch[detector_index].id;
            bool confirmed = false;
            for (std::size_t idx : candidates) {
                run_sequence(endpoint, batch[idx].id, wire[idx], config.timeouts, nullptr,
                             /*probe_after=*/false);
                if (!probe_liveness(endpoint, config.timeouts)) {
                    suspect = batch[idx].id;
                    confirmed = true;
                    if (!wait_until_reachable(endpoint, 15000)) {
                        halt.store(true);
                        halt_reason = "target-lost";
                    }
                    break;
                }
            }
            std::clog << "[mbfuzz] crash event: suspect=" << suspect
                      << (confirmed ? " (replay-confirmed, " : " (unconfirmed, ")
                      << candidates.size() << " candidates)\n";
            {
                std::lock_guard lock(recent_mutex);
                suspects.push_back(suspect);
            }
            if (config.stop_on_crash) {
                halt.store(true);
                halt_reason = "crash";
            }
        };

        auto worker = [&] {
            while (true) {
                std::size_t i = cursor.fetch_add(1);
                if (i >= n || halt.load()) break;

                SequenceOutcome so =
                    run_sequence(endpoint, batch[i].id, wire[i], config.timeouts, &traffic_mutex);

                StoredCase c;
                c.id = batch[i].id;
                c.seed = batch[i].seed;
                c.states = batch[i].states;
                for (const auto& msg : wire[i]) c.messages.push_back(msg.bytes);
                for (const auto& mo : so.messages)
                    c.outcome_classes.push_back(to_string(mo.outcome.cls));
                c.crashed = so.crashed;
                store.append(c);
                {
                    std::lock_guard lock(recent_mutex);
                    recent.push_back(i);
                    if (recent.size() > 24) recent.pop_front();
                }

                if (so.crashed) {
                    if (!recovering.exchange(true)) {
                        // A probe that failed during an outage can reach this
                        // point after the target already restarted; only a
                        // still-dead target marks a fresh crash event.
                        if (!TcpStream::connect(endpoint, 50)) confirm_crash(i);
                        recovering.store(false);
                    } else {
                        // Same outage; wait for the detector to finish.
                        while (recovering.load() && !halt.load())
                            std::this_thread::sleep_for(std::chrono::milliseconds(10));
                    }
                }

                outcomes[i] = std::move(so);
                executed[i] = 1;
            }
        };

        std::size_t worker_count = std::min<std::size_t>(static_cast<std::size_t>(config.workers), n);
        std::vector<std::thread> workers;
        for (std::size_t w = 0; w < worker_count; ++w) workers.emplace_back(worker);
        for (auto& t : workers) t.join();

        // (4) fold feedback
        FailureStats stats = FailureStats::for_states(model.selected_states);
        BatchReport batch_report;
        batch_report.index = b;
        for (std::size_t i = 0; i < n; ++i) {
            if (!executed[i]) {
                ++batch_report.skipped;
                continue;
            }
            stats = accumulate(std::move(stats), batch[i], outcomes[i]);
            if (outcomes[i].aborted)
                ++batch_report.aborted;
            else
                ++batch_report.completed;
        }
        batch_report.stats = batch_stats(batch, lengths);
        batch_report.failure_stats = stats_to_json(stats);
        batch_report.crash_suspects = suspects;

        ResultSummary summary;
        if (stats.messages > 0) summary = summarize(stats);
        batch_report.summary_text = summary.text;

        report.sequences_generated += n;
        report.messages_sent += stats.messages;
        report.completed += batch_report.completed;
        report.aborted += batch_report.aborted;
        report.skipped += batch_report.skipped;
        report.failures += stats.failures;
        for (std::uint64_t id : suspects) report.crashes.push_back({b, id});

        // (5) restart or adjust, before any batch N+1 traffic
        if (halt.load()) {
            batch_report.action = {{"type", "stopped"}, {"reason", halt_reason}};
            report.stop_reason = halt_reason;
            stop_campaign = true;
        } else if (restart_rng.chance(config.restart_probability)) {
            model = reset_to_initial(model, snapshot);
            ++report.restarts;
            batch_report.action = {{"type", "restart"}};
        } else {
            AdvisorDecision decision;
            if (stats.messages == 0) {
                decision.kind = DecisionKind::Keep;
                decision.reason = "no traffic this batch";
            } else {
                try {
                    decision = advisor.decide_adjustment(summary, model);
                } catch (const std::exception& e) {
                    decision.kind = DecisionKind::Keep;
                    decision.reason = std::string("advisor failure: ") + e.what();
                }
            }

            // Hallucination firewall: nothing unvalidated reaches the model.
            bool selected = std::find(model.selected_states.begin(), model.selected_states.end(),
                                      decision.state) != model.selected_states.end();
            bool candidate = std::find(model.candidate_states.begin(),
                                       model.candidate_states.end(),
                                       decision.state) != model.candidate_states.end();
            if ((decision.kind == DecisionKind::Add && (!candidate || selected)) ||
                (decision.kind == DecisionKind::Delete &&
                 (!selected || decision.state == model.initial_state))) {
                decision.reason = "rejected invalid " + std::string(to_string(decision.kind)) +
                                  " of '" + decision.state + "'";
                decision.kind = DecisionKind::Keep;
                decision.state.clear();
            }

            StateModel adjusted = apply_adjustment(model, decision);
            if (decision.kind != DecisionKind::Keep) {
                // The state set changed: re-propose the transition model.
                SelectionResult carried;
                for (const auto& s : adjusted.selected_states)
                    carried.states.push_back({s, "carried over"});
                try {
                    model = advisor.propose_model(carried, config.protocol, candidates);
                } catch (const std::exception&) {
                    model = adjusted; // default-synthesized edges stay valid
                }
            } else {
                model = adjusted;
            }
            batch_report.action = decision_json(decision);
        }

        std::clog << "[mbfuzz] batch=" << b << " total=" << batch_report.stats.total_cases
                  << " unique=" << batch_report.stats.unique_cases
                  << " failures=" << stats.failures << " crashes=" << suspects.size()
                  << " action=" << batch_report.action["type"].get<std::string>() << '\n';

        report.batches.push_back(std::move(batch_report));
        if (report.crash_found() && config.stop_on_crash) {
            report.stop_reason = "crash";
            stop_campaign = true;
        }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - campaign_start).count();
    report.finished_at = iso8601_now();
    report.token_ledger =
        bundle.backend ? bundle.backend->ledger().to_json() : TokenLedger().to_json();

    write_report_atomically(report.to_json(), config.report_path);
    if (testbed) testbed->stop();
    return report;
}

} // namespace mbfuzz
