// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mbfuzz {

enum class MutationKind { Insert, Delete, Mutate };

const char* to_string(MutationKind kind);

struct MutationRecord {
    MutationKind kind = MutationKind::Mutate;
    std::size_t offset = 0;
    std::vector<std::uint8_t> payload; // inserted/overwriting bytes; empty for delete
    std::size_t length = 0;            // affected byte count
};

// A state name rendered to wire bytes, with the mutations applied to it in
// application order.
struct EncodedMessage {
    std::string state;
    std::vector<std::uint8_t> bytes;
    std::vector<MutationRecord> mutations;
};

} // namespace mbfuzz
