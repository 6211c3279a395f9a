// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "mbfuzz/errors.hpp"

namespace mbfuzz {

std::uint64_t TokenLedger::prompt_tokens() const {
    std::uint64_t total = 0;
    for (const auto& r : records_) total += r.prompt_tokens;
    return total;
}

std::uint64_t TokenLedger::completion_tokens() const {
    std::uint64_t total = 0;
    for (const auto& r : records_) total += r.completion_tokens;
    return total;
}

nlohmann::json TokenLedger::to_json() const {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : records_)
        records.push_back({{"template_id", r.template_id},
                           {"prompt_tokens", r.prompt_tokens},
                           {"completion_tokens", r.completion_tokens},
                           {"wall_seconds", r.wall_seconds}});
    return nlohmann::json{{"calls", calls()},
                          {"prompt_tokens", prompt_tokens()},
                          {"completion_tokens", completion_tokens()},
                          {"total_tokens", total_tokens()},
                          {"records", std::move(records)}};
}

std::uint64_t estimate_tokens(const std::string& text) { return text.size() / 4 + 1; }

std::string ChatBackend::chat(const std::string& prompt, const ChatParams& params) {
    if (budget_.max_calls && ledger_.calls() + 1 > budget_.max_calls)
        throw BudgetExceeded("advisor call budget exhausted (" +
                             std::to_string(budget_.max_calls) + " calls)");
    if (budget_.max_tokens && ledger_.total_tokens() >= budget_.max_tokens)
        throw BudgetExceeded("advisor token budget exhausted (" +
                             std::to_string(budget_.max_tokens) + " tokens)");

    auto t0 = std::chrono::steady_clock::now();
    Completion completion = complete(prompt, params);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ledger_.add({params.template_id, completion.prompt_tokens, completion.completion_tokens, wall});
    return completion.text;
}

MockBackend::MockBackend(std::vector<std::string> replies)
    : replies_(replies.begin(), replies.end()) {}

MockBackend MockBackend::from_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mock reply fixture: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad mock reply fixture " + path + ": " + e.what());
    }
    if (!doc.is_array()) throw ConfigError("mock reply fixture must be a JSON array of strings");
    return MockBackend(doc.get<std::vector<std::string>>());
}

ChatBackend::Completion MockBackend::complete(const std::string& prompt, const ChatParams&) {
    prompts_seen_.push_back(prompt);
    if (replies_.empty()) throw AdvisorError("mock advisor script exhausted");
    std::string reply = std::move(replies_.front());
    replies_.pop_front();
    return {reply, estimate_tokens(prompt), estimate_tokens(reply)};
}

LlmBackend::LlmBackend(Options options) : options_(std::move(options)) {
    if (const char* key = std::getenv(options_.credential_env.c_str())) credential_ = key;
}

ChatBackend::Completion LlmBackend::complete(const std::string& prompt, const ChatParams& params) {
    nlohmann::json body{{"model", options_.model},
                        {"temperature", params.temperature},
                        {"messages", nlohmann::json::array({nlohmann::json{
                                         {"role", "user"}, {"content", prompt}}})}};
    std::string payload = body.dump();
    if (options_.log) options_.log("llm request " + options_.path + ": " + payload);

    std::string error;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));

        httplib::Client client(options_.base_url);
        client.set_connection_timeout(options_.timeout_seconds);
        client.set_read_timeout(options_.timeout_seconds);
        httplib::Headers headers;
        if (!credential_.empty()) headers.emplace("Authorization", "Bearer " + credential_);

        auto res = client.Post(options_.path, headers, payload, "application/json");
        if (!res) {
            error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            error = "server error " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            if (options_.log) options_.log("llm error " + std::to_string(res->status));
            throw AdvisorError("llm backend: HTTP " + std::to_string(res->status) + ": " +
                               res->body);
        }
        try {
            nlohmann::json reply = nlohmann::json::parse(res->body);
            Completion completion;
            completion.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
            if (reply.contains("usage")) {
                completion.prompt_tokens = reply["usage"].value("prompt_tokens", 0ull);
                completion.completion_tokens = reply["usage"].value("completion_tokens", 0ull);
            } else {
                completion.prompt_tokens = estimate_tokens(prompt);
                completion.completion_tokens = estimate_tokens(completion.text);
            }
            if (options_.log) options_.log("llm response: " + res->body);
            return completion;
        } catch (const nlohmann::json::exception& e) {
            throw AdvisorError(std::string("llm backend: malformed completion body: ") + e.what());
        }
    }
    throw AdvisorError("llm backend: " + error + " after " +
                       std::to_string(options_.max_retries + 1) + " attempts");
}

} // namespace mbfuzz
