// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mbfuzz/message.hpp"
#include "mbfuzz/rng.hpp"

namespace mbfuzz {

// Per-operator probabilities and the operator count cap. Each of the
// max_operations rounds applies at most one operator, so the probabilities
// must sum to <= 1.
struct MutationConfig {
    double insert_probability = 0.1;
    double delete_probability = 0.1;
    double mutate_probability = 0.1;
    int max_operations = 4;
    int max_chunk = 8; // bytes per insert/delete/overwrite

    bool enabled() const {
        return max_operations > 0 &&
               (insert_probability > 0 || delete_probability > 0 || mutate_probability > 0);
    }
};

// Applies 0..max_operations operators to the message bytes, recording each in
// msg.mutations. Deletion never shrinks the message below 1 byte.
EncodedMessage mutate(EncodedMessage msg, Rng& rng, const MutationConfig& config);

// Independent replay: applying the recorded list to the original bytes must
// reproduce the mutated bytes exactly.
std::vector<std::uint8_t> replay_mutations(std::vector<std::uint8_t> bytes,
                                           const std::vector<MutationRecord>& records);

} // namespace mbfuzz
