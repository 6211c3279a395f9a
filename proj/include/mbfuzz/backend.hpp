// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mbfuzz {

struct TokenRecord {
    std::string template_id;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    double wall_seconds = 0.0;
};

// Per-call accounting; totals are always the sum over records.
class TokenLedger {
public:
    void add(TokenRecord record) { records_.push_back(std::move(record)); }

    std::uint64_t calls() const { return records_.size(); }
    std::uint64_t prompt_tokens() const;
    std::uint64_t completion_tokens() const;
    std::uint64_t total_tokens() const { return prompt_tokens() + completion_tokens(); }
    const std::vector<TokenRecord>& records() const { return records_; }

    nlohmann::json to_json() const;

private:
    std::vector<TokenRecord> records_;
};

struct ChatParams {
    std::string template_id;
    double temperature = 0.5;
};

// 0 means unlimited.
struct ChatBudget {
    std::uint64_t max_calls = 0;
    std::uint64_t max_tokens = 0;
};

// Chat-completion interface the advisor talks through. chat() enforces the
// campaign budget and records every call in the ledger.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    std::string chat(const std::string& prompt, const ChatParams& params);

    TokenLedger& ledger() { return ledger_; }
    const TokenLedger& ledger() const { return ledger_; }
    void set_budget(ChatBudget budget) { budget_ = budget; }

protected:
    struct Completion {
        std::string text;
        std::uint64_t prompt_tokens = 0;
        std::uint64_t completion_tokens = 0;
    };
    virtual Completion complete(const std::string& prompt, const ChatParams& params) = 0;

private:
    TokenLedger ledger_;
    ChatBudget budget_;
};

// Scripted replies for offline tests; token counts are length estimates so
// ledger arithmetic stays exercisable. Throws when the script runs dry.
class MockBackend : public ChatBackend {
public:
    MockBackend() = default;
    explicit MockBackend(std::vector<std::string> replies);
    static MockBackend from_fixture(const std::string& path); // JSON array of strings

    void push_reply(std::string reply) { replies_.push_back(std::move(reply)); }
    std::size_t remaining() const { return replies_.size(); }
    const std::vector<std::string>& prompts_seen() const { return prompts_seen_; }

protected:
    Completion complete(const std::string& prompt, const ChatParams& params) override;

private:
    std::deque<std::string> replies_;
    std::vector<std::string> prompts_seen_;
};

// HTTP chat-completions client. The credential is read from an environment
// variable and redacted from logs.
class LlmBackend : public ChatBackend {
public:
    struct Options {
        std::string base_url = "https://api.openai.com";
        std::string path = "/v1/chat/completions";
        std::string model = "gpt-4o-mini";
        double temperature = 0.5;
        std::string credential_env = "MBFUZZ_API_KEY";
        int max_retries = 2; // transport retries per call
        int timeout_seconds = 60;
        std::function<void(const std::string&)> log; // optional request/response log sink
    };

    explicit LlmBackend(Options options);

protected:
    Completion complete(const std::string& prompt, const ChatParams& params) override;

private:
    Options options_;
    std::string credential_;
};

// Rough size estimate used when no real usage numbers exist.
std::uint64_t estimate_tokens(const std::string& text);

} // namespace mbfuzz
