// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "mbfuzz/mqtt.hpp"
#include "mbfuzz/mutate.hpp"
#include "mbfuzz/payload.hpp"

using namespace mbfuzz;

namespace {

EncodedMessage some_message() {
    EncodedMessage msg;
    msg.state = "PUBLISH";
    msg.bytes = {0x30, 0x07, 0x00, 0x03, 0x61, 0x2f, 0x62, 0x68, 0x69};
    return msg;
}

} // namespace

TEST_CASE("all-zero probabilities leave the bytes alone") {
    MutationConfig config;
    config.insert_probability = 0;
    config.delete_probability = 0;
    config.mutate_probability = 0;
    Rng rng(1);
    EncodedMessage msg = some_message();
    EncodedMessage out = mutate(msg, rng, config);
    CHECK(out.bytes == msg.bytes);
    CHECK(out.mutations.empty());
    CHECK_FALSE(config.enabled());
}

TEST_CASE("a single insert grows the message by exactly its payload size") {
    MutationConfig config;
    config.insert_probability = 1.0;
    config.delete_probability = 0;
    config.mutate_probability = 0;
    config.max_operations = 1;
    Rng rng(9);
    EncodedMessage msg = some_message();
    std::size_t before = msg.bytes.size();
    EncodedMessage out = mutate(std::move(msg), rng, config);
    REQUIRE(out.mutations.size() == 1);
    const auto& rec = out.mutations.front();
    CHECK(rec.kind == MutationKind::Insert);
    CHECK(out.bytes.size() == before + rec.length);
    CHECK(rec.payload.size() == rec.length);
}

TEST_CASE("deletion never empties the message") {
    MutationConfig config;
    config.insert_probability = 0;
    config.delete_probability = 1.0;
    config.mutate_probability = 0;
    config.max_operations = 64;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        EncodedMessage msg;
        msg.bytes = {0xc0, 0x00};
        EncodedMessage out = mutate(std::move(msg), rng, config);
        CHECK(out.bytes.size() >= 1);
    }
}

TEST_CASE("replaying the recorded mutations reproduces the bytes exactly") {
    MutationConfig config; // defaults: 0.1 each, up to 4 ops
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        Rng rng(seed);
        EncodedMessage original = some_message();
        EncodedMessage mutated = mutate(original, rng, config);
        CHECK(replay_mutations(original.bytes, mutated.mutations) == mutated.bytes);
        // records are in application order with coherent offsets by construction
        for (const auto& rec : mutated.mutations) {
            if (rec.kind == MutationKind::Delete) CHECK(rec.payload.empty());
        }
    }
}

TEST_CASE("operator count never exceeds the configured maximum") {
    MutationConfig config;
    config.insert_probability = 0.33;
    config.delete_probability = 0.33;
    config.mutate_probability = 0.33;
    config.max_operations = 4;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        Rng rng(seed);
        EncodedMessage out = mutate(some_message(), rng, config);
        CHECK(out.mutations.size() <= 4);
    }
}

TEST_CASE("misconfigured probabilities are rejected") {
    MutationConfig config;
    config.insert_probability = 0.5;
    config.delete_probability = 0.4;
    config.mutate_probability = 0.2; // sums past 1
    Rng rng(1);
    CHECK_THROWS_AS(mutate(some_message(), rng, config), std::invalid_argument);
}

TEST_CASE("encode_state renders and mutates deterministically per seed") {
    PayloadOptions options;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng a(seed), b(seed);
        EncodedMessage x = encode_state("MQTT", "PUBLISH", a, options);
        EncodedMessage y = encode_state("MQTT", "PUBLISH", b, options);
        CHECK(x.bytes == y.bytes);
        CHECK(x.state == "PUBLISH");
    }
    Rng rng(3);
    EncodedMessage m = encode_state("MODBUS", "READ_COILS", rng, options);
    CHECK(m.state == "READ_COILS");
    CHECK_THROWS(encode_state("MQTT", "NOT_A_PACKET", rng, options));
    CHECK_THROWS(encode_state("DAAP", "LIST", rng, options));
}
