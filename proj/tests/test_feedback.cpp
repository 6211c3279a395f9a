// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "mbfuzz/feedback.hpp"

using namespace mbfuzz;

namespace {

MessageOutcome make_outcome(const std::string& state, OutcomeClass cls, int first_byte = -1) {
    MessageOutcome mo;
    mo.state = state;
    mo.outcome.cls = cls;
    if (first_byte >= 0) mo.outcome.response_bytes = {static_cast<std::uint8_t>(first_byte)};
    return mo;
}

} // namespace

TEST_CASE("failure arithmetic per state") {
    FailureStats stats = FailureStats::for_states({"PUBLISH"});
    for (int i = 0; i < 10; ++i) {
        MessageSequence seq{static_cast<std::uint64_t>(i), {"PUBLISH"}, 0};
        SequenceOutcome outcome;
        outcome.sequence_id = seq.id;
        outcome.messages.push_back(
            make_outcome("PUBLISH", i < 3 ? OutcomeClass::Timeout : OutcomeClass::ResponseReceived,
                         i < 3 ? -1 : 0x40));
        stats = accumulate(std::move(stats), seq, outcome);
    }
    CHECK(stats.per_state.at("PUBLISH").requests == 10);
    CHECK(stats.per_state.at("PUBLISH").failures == 3);
    CHECK(stats.messages == 10);
    CHECK(stats.sequences == 10);
    CHECK(stats.overall_failure_rate() == doctest::Approx(0.3));
}

TEST_CASE("all responses received means zero failure rates") {
    FailureStats stats = FailureStats::for_states({"CONNECT", "PINGREQ"});
    MessageSequence seq{5, {"CONNECT", "PINGREQ"}, 0};
    SequenceOutcome outcome;
    outcome.sequence_id = 5;
    outcome.messages.push_back(make_outcome("CONNECT", OutcomeClass::ResponseReceived, 0x20));
    outcome.messages.push_back(make_outcome("PINGREQ", OutcomeClass::ResponseReceived, 0xd0));
    stats = accumulate(std::move(stats), seq, outcome);
    CHECK(stats.failures == 0);
    CHECK(stats.per_state.at("CONNECT").failures == 0);
    CHECK(stats.crashes == 0);
    CHECK(stats.distinct_responses.size() == 2);
}

TEST_CASE("mismatched ids are rejected") {
    FailureStats stats;
    MessageSequence seq{1, {"CONNECT"}, 0};
    SequenceOutcome outcome;
    outcome.sequence_id = 2;
    CHECK_THROWS_AS(accumulate(stats, seq, outcome), std::invalid_argument);
}

TEST_CASE("only sent messages count; crashes increment once per sequence") {
    FailureStats stats = FailureStats::for_states({"CONNECT", "PUBLISH", "PINGREQ"});
    MessageSequence seq{9, {"CONNECT", "PUBLISH", "PINGREQ"}, 0};
    SequenceOutcome outcome;
    outcome.sequence_id = 9;
    outcome.messages.push_back(make_outcome("CONNECT", OutcomeClass::ResponseReceived, 0x20));
    outcome.messages.push_back(make_outcome("PUBLISH", OutcomeClass::ConnectionReset));
    outcome.crashed = true; // aborted after the reset
    stats = accumulate(std::move(stats), seq, outcome);
    CHECK(stats.messages == 2);
    CHECK(stats.per_state.at("PINGREQ").requests == 0);
    CHECK(stats.crashes == 1);
}

TEST_CASE("fold order does not change the result") {
    std::vector<std::string> states{"CONNECT", "CONNACK", "PUBLISH", "SUBSCRIBE"};
    std::vector<std::pair<MessageSequence, SequenceOutcome>> log;
    std::mt19937_64 rng(42);
    for (std::uint64_t i = 0; i < 10'000; ++i) {
        MessageSequence seq{i, {}, i};
        SequenceOutcome outcome;
        outcome.sequence_id = i;
        std::size_t len = 1 + rng() % 4;
        for (std::size_t j = 0; j < len; ++j) {
            const auto& state = states[rng() % states.size()];
            seq.states.push_back(state);
            auto cls = static_cast<OutcomeClass>(rng() % 5);
            outcome.messages.push_back(
                make_outcome(state, cls,
                             cls == OutcomeClass::ResponseReceived
                                 ? static_cast<int>(rng() % 256)
                                 : -1));
        }
        outcome.crashed = rng() % 97 == 0;
        log.emplace_back(std::move(seq), std::move(outcome));
    }

    auto fold = [&](const std::vector<std::size_t>& order) {
        FailureStats stats = FailureStats::for_states(states);
        for (std::size_t idx : order) stats = accumulate(std::move(stats), log[idx].first, log[idx].second);
        return stats;
    };

    std::vector<std::size_t> order(log.size());
    std::iota(order.begin(), order.end(), 0);
    FailureStats base = fold(order);
    for (int round = 0; round < 3; ++round) {
        std::shuffle(order.begin(), order.end(), rng);
        FailureStats shuffled = fold(order);
        CHECK(shuffled == base);
    }
}

TEST_CASE("summary text is deterministic, sorted and complete") {
    FailureStats stats = FailureStats::for_states({"PUBLISH", "CONNECT", "PINGREQ"});
    MessageSequence seq{0, {"PUBLISH"}, 0};
    SequenceOutcome outcome;
    outcome.sequence_id = 0;
    outcome.messages.push_back(make_outcome("PUBLISH", OutcomeClass::Timeout));
    stats = accumulate(std::move(stats), seq, outcome);

    ResultSummary a = summarize(stats);
    ResultSummary b = summarize(stats);
    CHECK(a.text == b.text);

    // 1/1 failure renders as 1.0000; untouched states render n/a
    CHECK(a.text.find("PUBLISH: requests=1 failures=1 rate=1.0000") != std::string::npos);
    CHECK(a.text.find("CONNECT: requests=0 failures=0 rate=n/a") != std::string::npos);

    // sorted by state name, totals footer last
    auto connect_pos = a.text.find("CONNECT:");
    auto pingreq_pos = a.text.find("PINGREQ:");
    auto publish_pos = a.text.find("PUBLISH:");
    auto totals_pos = a.text.find("totals:");
    CHECK(connect_pos < pingreq_pos);
    CHECK(pingreq_pos < publish_pos);
    CHECK(publish_pos < totals_pos);
}

TEST_CASE("summary line count is the state count plus one footer") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 20; ++round) {
        std::vector<std::string> states;
        std::size_t n = 1 + rng() % 12;
        for (std::size_t i = 0; i < n; ++i) states.push_back("S" + std::to_string(i));
        FailureStats stats = FailureStats::for_states(states);
        MessageSequence seq{0, {states[0]}, 0};
        SequenceOutcome outcome;
        outcome.sequence_id = 0;
        outcome.messages.push_back(make_outcome(states[0], OutcomeClass::ResponseReceived, 1));
        stats = accumulate(std::move(stats), seq, outcome);

        std::string text = summarize(stats).text;
        std::size_t lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
        CHECK(lines == n + 1);
    }
}

TEST_CASE("summarizing empty stats is an error") {
    FailureStats stats = FailureStats::for_states({"CONNECT"});
    CHECK_THROWS_AS(summarize(stats), std::invalid_argument);
}

TEST_CASE("per-state requests sum to total messages") {
    FailureStats stats = FailureStats::for_states({"A", "B"});
    std::mt19937_64 rng(3);
    for (std::uint64_t i = 0; i < 500; ++i) {
        MessageSequence seq{i, {}, 0};
        SequenceOutcome outcome;
        outcome.sequence_id = i;
        std::size_t len = 1 + rng() % 3;
        for (std::size_t j = 0; j < len; ++j) {
            std::string state = rng() % 2 ? "A" : "B";
            seq.states.push_back(state);
            outcome.messages.push_back(make_outcome(state, OutcomeClass::ResponseReceived, 0));
        }
        stats = accumulate(std::move(stats), seq, outcome);
    }
    std::uint64_t sum = 0;
    for (const auto& [state, tally] : stats.per_state) sum += tally.requests;
    CHECK(sum == stats.messages);
}
