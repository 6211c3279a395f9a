// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mbfuzz/model.hpp"
#include "mbfuzz/rng.hpp"

namespace mbfuzz {

struct MessageSequence {
    std::uint64_t id = 0;
    std::vector<std::string> states;
    std::uint64_t seed = 0;
};

struct BatchStats {
    std::size_t total_cases = 0;
    std::size_t unique_cases = 0; // distinct state-sequence values
    double avg_length = 0.0;      // mean encoded byte length per sequence
};

// Safety cap so a stop probability of 0 with a reconnect loop cannot spin
// forever; unreachable for any realistic configuration.
inline constexpr std::size_t kMaxSequenceLength = 1u << 16;

// One sampling step: weight-proportional next-state choice, append, then a
// stop coin with stop_probability. The coin also runs after the initial
// state, so the minimum length is 1. At the reconnect state the generator
// re-enters the initial state with reenter_probability instead of picking an
// edge, or ends the sequence.
std::vector<std::string> sample_states(const StateModel& model, Rng& rng);

MessageSequence generate_sequence(const StateModel& model, std::uint64_t seed,
                                  std::uint64_t id = 0);

// Exactly n sequences with consecutive ids from id_base; per-sequence seeds
// derived from master_seed, so equal arguments reproduce the batch
// element-for-element. Validates the model once up front.
std::vector<MessageSequence> generate_batch(const StateModel& model, std::size_t n,
                                            std::uint64_t master_seed,
                                            std::uint64_t id_base = 0);

// encoded_lengths[i] is the total wire byte count of batch[i] after encoding.
BatchStats batch_stats(std::span<const MessageSequence> batch,
                       std::span<const std::size_t> encoded_lengths);

// One JSON object per line: {"id":..,"seed":..,"states":[..]}.
void write_batch_jsonl(std::span<const MessageSequence> batch, std::ostream& out);

} // namespace mbfuzz
