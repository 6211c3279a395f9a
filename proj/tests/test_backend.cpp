// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mbfuzz/backend.hpp"
#include "mbfuzz/errors.hpp"

using namespace mbfuzz;

namespace {

// Local chat-completions stand-in; everything over plain http.
struct StubApi {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> hits{0};
    std::atomic<int> fail_first{0}; // respond 500 to this many requests
    nlohmann::json last_request;
    std::string last_auth;

    StubApi() {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
            hits++;
            last_request = nlohmann::json::parse(req.body);
            last_auth = req.get_header_value("Authorization");
            if (fail_first.load() > 0) {
                fail_first--;
                res.status = 500;
                res.set_content("try later", "text/plain");
                return;
            }
            nlohmann::json reply{
                {"choices",
                 nlohmann::json::array(
                     {nlohmann::json{{"message", {{"role", "assistant"},
                                                  {"content", "{\"decision\":\"ADD\"}"}}}}})},
                {"usage", {{"prompt_tokens", 120}, {"completion_tokens", 8}}}};
            res.set_content(reply.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~StubApi() {
        server.stop();
        thread.join();
    }

    LlmBackend::Options options() {
        LlmBackend::Options o;
        o.base_url = "http://127.0.0.1:" + std::to_string(port);
        o.model = "test-model";
        o.credential_env = "MBFUZZ_TEST_KEY";
        o.max_retries = 2;
        return o;
    }
};

} // namespace

TEST_CASE("llm backend posts the chat body and accounts usage tokens") {
    ::setenv("MBFUZZ_TEST_KEY", "sk-very-secret", 1);
    StubApi api;
    std::vector<std::string> log_lines;
    auto options = api.options();
    options.log = [&](const std::string& line) { log_lines.push_back(line); };

    LlmBackend backend(options);
    std::string reply = backend.chat("hello there", {"adjustment_decision", 0.5});

    CHECK(reply == "{\"decision\":\"ADD\"}");
    CHECK(api.last_request["model"] == "test-model");
    CHECK(api.last_request["temperature"] == doctest::Approx(0.5));
    CHECK(api.last_request["messages"][0]["role"] == "user");
    CHECK(api.last_request["messages"][0]["content"] == "hello there");
    CHECK(api.last_auth == "Bearer sk-very-secret");

    const TokenLedger& ledger = backend.ledger();
    REQUIRE(ledger.calls() == 1);
    CHECK(ledger.prompt_tokens() == 120);
    CHECK(ledger.completion_tokens() == 8);
    CHECK(ledger.records().front().template_id == "adjustment_decision");

    // request/response bodies are logged, the credential never is
    CHECK(!log_lines.empty());
    for (const auto& line : log_lines) CHECK(line.find("sk-very-secret") == std::string::npos);
}

TEST_CASE("llm backend retries transient 500s") {
    StubApi api;
    api.fail_first = 2;
    LlmBackend backend(api.options());
    std::string reply = backend.chat("retry me", {"state_selection", 0.5});
    CHECK(reply == "{\"decision\":\"ADD\"}");
    CHECK(api.hits.load() == 3);

    api.fail_first = 10; // more failures than retries
    CHECK_THROWS_AS(backend.chat("nope", {"state_selection", 0.5}), AdvisorError);
}

TEST_CASE("token budget cap blocks further calls") {
    StubApi api;
    LlmBackend backend(api.options());
    backend.set_budget({0, 100}); // 100-token cap
    backend.chat("first", {"a", 0.5}); // 128 tokens used now
    CHECK_THROWS_AS(backend.chat("second", {"a", 0.5}), BudgetExceeded);
    CHECK(api.hits.load() == 1);
}

TEST_CASE("mock fixture file feeds scripted replies in order") {
    std::string path = "mock_replies_fixture.json";
    {
        nlohmann::json doc = nlohmann::json::array({"one", "two"});
        std::FILE* f = std::fopen(path.c_str(), "w");
        REQUIRE(f);
        std::string text = doc.dump();
        std::fwrite(text.data(), 1, text.size(), f);
        std::fclose(f);
    }
    MockBackend backend = MockBackend::from_fixture(path);
    CHECK(backend.chat("p1", {"t", 0.5}) == "one");
    CHECK(backend.chat("p2", {"t", 0.5}) == "two");
    CHECK_THROWS_AS(backend.chat("p3", {"t", 0.5}), AdvisorError);
    CHECK(backend.ledger().calls() == 2);
    std::remove(path.c_str());
}
