// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/config.hpp"

#include <fstream>

#include "mbfuzz/errors.hpp"

namespace mbfuzz {

namespace {

template <typename T>
void read(const nlohmann::json& doc, const char* key, T& out) {
    if (doc.contains(key)) {
        try {
            out = doc.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config field '") + key + "': " + e.what());
        }
    }
}

} // namespace

CampaignConfig config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    CampaignConfig c;
    read(doc, "protocol", c.protocol);
    read(doc, "endpoint", c.endpoint);
    read(doc, "batch_size", c.batch_size);
    read(doc, "max_batches", c.max_batches);
    read(doc, "state_count", c.state_count);
    read(doc, "restart_probability", c.restart_probability);
    read(doc, "master_seed", c.master_seed);
    read(doc, "stop_on_crash", c.stop_on_crash);
    read(doc, "workers", c.workers);
    read(doc, "modbus_truncate_probability", c.modbus_truncate_probability);
    read(doc, "corpus_path", c.corpus_path);
    read(doc, "report_path", c.report_path);
    read(doc, "candidates_path", c.candidates_path);
    read(doc, "prompts_dir", c.prompts_dir);
    read(doc, "batch_export_dir", c.batch_export_dir);

    if (doc.contains("testbed")) {
        const auto& tb = doc["testbed"];
        read(tb, "enabled", c.testbed.enabled);
        read(tb, "kind", c.testbed.kind);
        read(tb, "auto_restart", c.testbed.auto_restart);
        read(tb, "restart_delay_ms", c.testbed.restart_delay_ms);
        if (tb.contains("bugs")) {
            const auto& bugs = tb["bugs"];
            read(bugs, "ping_without_connect", c.testbed.bugs.ping_without_connect);
            read(bugs, "zero_length_publish", c.testbed.bugs.zero_length_publish);
            read(bugs, "short_pdu", c.testbed.bugs.short_pdu);
        }
    }

    if (doc.contains("advisor")) {
        const auto& adv = doc["advisor"];
        read(adv, "backend", c.advisor.backend);
        read(adv, "temperature", c.advisor.temperature);
        read(adv, "augment_candidates", c.advisor.augment_candidates);
        read(adv, "candidate_cap", c.advisor.candidate_cap);
        read(adv, "mock_replies", c.advisor.mock_replies);
        read(adv, "mock_replies_path", c.advisor.mock_replies_path);
        if (adv.contains("heuristic")) {
            const auto& h = adv["heuristic"];
            read(h, "delete_rate", c.advisor.heuristic.delete_rate);
            read(h, "delete_min_requests", c.advisor.heuristic.delete_min_requests);
            read(h, "add_overall_rate", c.advisor.heuristic.add_overall_rate);
        }
        if (adv.contains("llm")) {
            const auto& llm = adv["llm"];
            read(llm, "base_url", c.advisor.llm.base_url);
            read(llm, "path", c.advisor.llm.path);
            read(llm, "model", c.advisor.llm.model);
            read(llm, "credential_env", c.advisor.llm.credential_env);
            read(llm, "max_retries", c.advisor.llm.max_retries);
            read(llm, "timeout_seconds", c.advisor.llm.timeout_seconds);
        }
    }

    if (doc.contains("budget")) {
        const auto& b = doc["budget"];
        read(b, "max_tokens", c.budget.max_tokens);
        read(b, "max_calls", c.budget.max_calls);
        read(b, "wall_clock_seconds", c.budget.wall_clock_seconds);
    }

    if (doc.contains("mutation")) {
        const auto& m = doc["mutation"];
        read(m, "insert_probability", c.mutation.insert_probability);
        read(m, "delete_probability", c.mutation.delete_probability);
        read(m, "mutate_probability", c.mutation.mutate_probability);
        read(m, "max_operations", c.mutation.max_operations);
        read(m, "max_chunk", c.mutation.max_chunk);
    }

    if (doc.contains("timeouts")) {
        const auto& t = doc["timeouts"];
        read(t, "connect_timeout_ms", c.timeouts.connect_timeout_ms);
        read(t, "read_timeout_ms", c.timeouts.read_timeout_ms);
        read(t, "probe_retries", c.timeouts.probe_retries);
        read(t, "probe_backoff_ms", c.timeouts.probe_backoff_ms);
        read(t, "probe_connect_timeout_ms", c.timeouts.probe_connect_timeout_ms);
    }

    return c;
}

nlohmann::json config_to_json(const CampaignConfig& c) {
    return nlohmann::json{
        {"protocol", c.protocol},
        {"endpoint", c.endpoint},
        {"testbed",
         {{"enabled", c.testbed.enabled},
          {"kind", c.testbed.kind},
          {"auto_restart", c.testbed.auto_restart},
          {"restart_delay_ms", c.testbed.restart_delay_ms},
          {"bugs",
           {{"ping_without_connect", c.testbed.bugs.ping_without_connect},
            {"zero_length_publish", c.testbed.bugs.zero_length_publish},
            {"short_pdu", c.testbed.bugs.short_pdu}}}}},
        {"batch_size", c.batch_size},
        {"max_batches", c.max_batches},
        {"state_count", c.state_count},
        {"restart_probability", c.restart_probability},
        {"master_seed", c.master_seed},
        {"stop_on_crash", c.stop_on_crash},
        {"workers", c.workers},
        {"advisor",
         {{"backend", c.advisor.backend},
          {"temperature", c.advisor.temperature},
          {"augment_candidates", c.advisor.augment_candidates},
          {"candidate_cap", c.advisor.candidate_cap},
          {"mock_replies", c.advisor.mock_replies},
          {"mock_replies_path", c.advisor.mock_replies_path},
          {"heuristic",
           {{"delete_rate", c.advisor.heuristic.delete_rate},
            {"delete_min_requests", c.advisor.heuristic.delete_min_requests},
            {"add_overall_rate", c.advisor.heuristic.add_overall_rate}}},
          {"llm",
           {{"base_url", c.advisor.llm.base_url},
            {"path", c.advisor.llm.path},
            {"model", c.advisor.llm.model},
            {"credential_env", c.advisor.llm.credential_env},
            {"max_retries", c.advisor.llm.max_retries},
            {"timeout_seconds", c.advisor.llm.timeout_seconds}}}}},
        {"budget",
         {{"max_tokens", c.budget.max_tokens},
          {"max_calls", c.budget.max_calls},
          {"wall_clock_seconds", c.budget.wall_clock_seconds}}},
        {"mutation",
         {{"insert_probability", c.mutation.insert_probability},
          {"delete_probability", c.mutation.delete_probability},
          {"mutate_probability", c.mutation.mutate_probability},
          {"max_operations", c.mutation.max_operations},
          {"max_chunk", c.mutation.max_chunk}}},
        {"timeouts",
         {{"connect_timeout_ms", c.timeouts.connect_timeout_ms},
          {"read_timeout_ms", c.timeouts.read_timeout_ms},
          {"probe_retries", c.timeouts.probe_retries},
          {"probe_backoff_ms", c.timeouts.probe_backoff_ms},
          {"probe_connect_timeout_ms", c.timeouts.probe_connect_timeout_ms}}},
        {"modbus_truncate_probability", c.modbus_truncate_probability},
        {"corpus_path", c.corpus_path},
        {"report_path", c.report_path},
        {"candidates_path", c.candidates_path},
        {"prompts_dir", c.prompts_dir},
        {"batch_export_dir", c.batch_export_dir}};
}

CampaignConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse config file " + path + ": " + e.what());
    }
    return config_from_json(doc);
}

void save_config_file(const CampaignConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file: " + path);
    out << config_to_json(config).dump(2) << '\n';
}

void validate_config(const CampaignConfig& c) {
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (c.protocol != "MQTT" && c.protocol != "MODBUS")
        throw ConfigError("protocol must be MQTT or MODBUS");
    if (c.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (c.max_batches < 1) throw ConfigError("max_batches must be >= 1");
    if (c.state_count < 1) throw ConfigError("state_count must be >= 1");
    if (!in_unit(c.restart_probability)) throw ConfigError("restart_probability outside [0,1]");
    if (!in_unit(c.modbus_truncate_probability))
        throw ConfigError("modbus_truncate_probability outside [0,1]");
    if (c.workers < 1) throw ConfigError("workers must be >= 1");
    if (!in_unit(c.mutation.insert_probability) || !in_unit(c.mutation.delete_probability) ||
        !in_unit(c.mutation.mutate_probability) ||
        c.mutation.insert_probability + c.mutation.delete_probability +
                c.mutation.mutate_probability > 1.0)
        throw ConfigError("mutation probabilities must lie in [0,1] and sum to <= 1");
    if (c.mutation.max_operations < 0) throw ConfigError("mutation.max_operations must be >= 0");
    if (c.advisor.backend != "heuristic" && c.advisor.backend != "llm" &&
        c.advisor.backend != "mock")
        throw ConfigError("advisor.backend must be heuristic, llm or mock");
    if (!c.testbed.enabled && c.endpoint.empty())
        throw ConfigError("either an endpoint or the bundled testbed is required");
    if (!c.testbed.kind.empty()) testbed_kind_from_string(c.testbed.kind);
}

} // namespace mbfuzz
