// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "mbfuzz/protocols.hpp"
#include "mbfuzz/seqgen.hpp"

using namespace mbfuzz;

namespace {

// Exhaustive edge lookup used as the path-validity check.
bool path_valid(const StateModel& model, const std::vector<std::string>& states) {
    if (states.empty() || states.front() != model.initial_state) return false;
    for (std::size_t i = 0; i + 1 < states.size(); ++i) {
        const auto& from = states[i];
        const auto& to = states[i + 1];
        bool edge = false;
        if (auto it = model.transitions.find(from); it != model.transitions.end())
            for (const auto& t : it->second)
                if (t.target == to) edge = true;
        if (!edge && model.reconnect_rule && from == model.reconnect_rule->state &&
            to == model.initial_state)
            edge = true;
        if (!edge) return false;
    }
    return true;
}

} // namespace

TEST_CASE("single-state model with stop probability 1 always yields [CONNECT]") {
    StateModel model;
    model.protocol = "MQTT";
    model.candidate_states = {"CONNECT"};
    model.selected_states = {"CONNECT"};
    model.initial_state = "CONNECT";
    model.stop_probability = 1.0;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        MessageSequence seq = generate_sequence(model, seed);
        CHECK(seq.states == std::vector<std::string>{"CONNECT"});
    }
}

TEST_CASE("same model and seed give identical sequences") {
    StateModel model = sample_mqtt_model();
    for (std::uint64_t seed : {0ull, 1ull, 42ull, 0xdeadbeefull}) {
        MessageSequence a = generate_sequence(model, seed, 7);
        MessageSequence b = generate_sequence(model, seed, 7);
        CHECK(a.states == b.states);
        CHECK(a.seed == seed);
    }
}

TEST_CASE("every generated sequence starts at the initial state and walks edges") {
    StateModel model = sample_mqtt_model();
    auto batch = generate_batch(model, 5000, 991);
    for (const auto& seq : batch) {
        REQUIRE(!seq.states.empty());
        CHECK(seq.states.front() == "CONNECT");
        CHECK(path_valid(model, seq.states));
    }
}

TEST_CASE("first transition follows the 70/30 weighting") {
    StateModel model = sample_mqtt_model();
    std::size_t with_second = 0;
    std::size_t connack = 0;
    const std::size_t n = 100'000;
    for (std::size_t i = 0; i < n; ++i) {
        MessageSequence seq = generate_sequence(model, derive_seed(123, i));
        if (seq.states.size() < 2) continue;
        ++with_second;
        if (seq.states[1] == "CONNACK") ++connack;
    }
    double freq = static_cast<double>(connack) / static_cast<double>(with_second);
    CHECK(freq > 0.68);
    CHECK(freq < 0.72);
}

TEST_CASE("branch frequencies match weights within 3 binomial sigma") {
    StateModel model = sample_mqtt_model();
    std::map<std::string, std::map<std::string, std::size_t>> counts;
    std::map<std::string, std::size_t> visits;
    for (std::size_t i = 0; i < 200'000; ++i) {
        MessageSequence seq = generate_sequence(model, derive_seed(5150, i));
        for (std::size_t j = 0; j + 1 < seq.states.size(); ++j) {
            // reconnect jumps are not weighted-edge draws
            if (model.reconnect_rule && seq.states[j] == model.reconnect_rule->state) continue;
            ++visits[seq.states[j]];
            ++counts[seq.states[j]][seq.states[j + 1]];
        }
    }
    for (const auto& [source, edges] : model.transitions) {
        double total_weight = 0;
        for (const auto& e : edges) total_weight += e.weight;
        std::size_t n = visits[source];
        REQUIRE(n > 1000);
        for (const auto& e : edges) {
            double p = e.weight / total_weight;
            double freq = static_cast<double>(counts[source][e.target]) / static_cast<double>(n);
            double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
            CHECK_MESSAGE(std::abs(freq - p) <= 3 * sigma,
                          source << "->" << e.target << " freq " << freq << " expected " << p);
        }
    }
}

TEST_CASE("mean length tracks 1/p without a reconnect rule") {
    for (double p : {0.25, 0.5}) {
        StateModel model;
        model.protocol = "MQTT";
        model.candidate_states = {"CONNECT", "PINGREQ"};
        model.selected_states = {"CONNECT", "PINGREQ"};
        model.initial_state = "CONNECT";
        model.transitions = {{"CONNECT", {{"PINGREQ", 1}}}, {"PINGREQ", {{"CONNECT", 1}}}};
        model.stop_probability = p;

        double total = 0;
        const std::size_t n = 100'000;
        for (std::size_t i = 0; i < n; ++i)
            total += static_cast<double>(
                generate_sequence(model, derive_seed(777 + static_cast<int>(p * 100), i)).states.size());
        double mean = total / static_cast<double>(n);
        CHECK(std::abs(mean - 1.0 / p) < 0.05 * (1.0 / p));
    }
}

TEST_CASE("generate_batch is reproducible with consecutive ids") {
    StateModel model = sample_mqtt_model();
    auto a = generate_batch(model, 500, 2024, 1000);
    auto b = generate_batch(model, 500, 2024, 1000);
    REQUIRE(a.size() == 500);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == 1000 + i);
        CHECK(a[i].seed == b[i].seed);
        CHECK(a[i].states == b[i].states);
    }

    CHECK_THROWS_AS(generate_batch(model, 0, 1), std::invalid_argument);
    StateModel broken = model;
    broken.transitions["CONNECT"][0].weight = -1;
    CHECK_THROWS_AS(generate_batch(broken, 10, 1), std::invalid_argument);
}

TEST_CASE("n=1 batch is a singleton") {
    auto batch = generate_batch(sample_mqtt_model(), 1, 3);
    CHECK(batch.size() == 1);
}

TEST_CASE("batch_stats counts totals, uniques and mean encoded length") {
    MessageSequence a{0, {"CONNECT", "CONNACK"}, 1};
    MessageSequence b{1, {"CONNECT", "CONNACK"}, 2};
    MessageSequence c{2, {"CONNECT", "SUBSCRIBE"}, 3};
    std::vector<MessageSequence> batch{a, b, c};
    std::vector<std::size_t> lengths{100, 150, 125};

    BatchStats stats = batch_stats(batch, lengths);
    CHECK(stats.total_cases == 3);
    CHECK(stats.unique_cases == 2);
    CHECK(stats.avg_length == doctest::Approx(125.0));

    std::vector<std::size_t> two{100, 150};
    std::vector<MessageSequence> pair{a, c};
    CHECK(batch_stats(pair, two).avg_length == doctest::Approx(125.0));

    std::vector<MessageSequence> none;
    std::vector<std::size_t> no_lengths;
    CHECK_THROWS_AS(batch_stats(none, no_lengths), std::invalid_argument);
}

TEST_CASE("unique counts match the quadratic comparison oracle") {
    StateModel model = sample_mqtt_model();
    auto batch = generate_batch(model, 1000, 8088);
    std::vector<std::size_t> lengths(batch.size(), 1);

    // O(n^2) pairwise oracle
    std::size_t unique = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        bool duplicate_of_earlier = false;
        for (std::size_t j = 0; j < i; ++j)
            if (batch[i].states == batch[j].states) {
                duplicate_of_earlier = true;
                break;
            }
        if (!duplicate_of_earlier) ++unique;
    }

    CHECK(batch_stats(batch, lengths).unique_cases == unique);
}

TEST_CASE("jsonl export carries id, seed and states per line") {
    auto batch = generate_batch(sample_mqtt_model(), 3, 11, 5);
    std::ostringstream out;
    write_batch_jsonl(batch, out);

    std::istringstream in(out.str());
    std::string line;
    std::size_t count = 0;
    while (std::getline(in, line)) {
        auto doc = nlohmann::json::parse(line);
        CHECK(doc["id"] == 5 + count);
        CHECK(doc["seed"] == batch[count].seed);
        CHECK(doc["states"].get<std::vector<std::string>>() == batch[count].states);
        ++count;
    }
    CHECK(count == 3);
}

TEST_CASE("reconnect rule re-enters the initial state") {
    StateModel model = sample_mqtt_model();
    bool saw_reconnect = false;
    for (std::size_t i = 0; i < 20'000 && !saw_reconnect; ++i) {
        MessageSequence seq = generate_sequence(model, derive_seed(31337, i));
        for (std::size_t j = 0; j + 1 < seq.states.size(); ++j)
            if (seq.states[j] == "DISCONNECT" && seq.states[j + 1] == "CONNECT")
                saw_reconnect = true;
    }
    CHECK(saw_reconnect);
}
