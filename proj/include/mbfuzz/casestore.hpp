// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mbfuzz/harness.hpp"

namespace mbfuzz {

// One executed test case: abstract states, exact wire bytes per message, and
// the outcome summary. Timestamps and checksums are filled in at append time.
struct StoredCase {
    std::uint64_t id = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> states;
    std::vector<std::vector<std::uint8_t>> messages;
    std::vector<std::string> outcome_classes; // per sent message
    bool crashed = false;
    std::string timestamp;
};

// Checksum over the replay-relevant payload (id, seed, states, bytes).
std::uint64_t case_checksum(const StoredCase& c);

// Append-only JSONL store with one serialized writer; message bytes are hex
// encoded and every record carries its checksum.
class CaseStore {
public:
    explicit CaseStore(std::string path, bool truncate = false);

    void append(StoredCase c); // stamps timestamp; thread-safe
    const std::string& path() const { return path_; }

    // Both throw StoreError on unreadable records or checksum mismatches.
    static std::vector<StoredCase> read_all(const std::string& path);
    static std::optional<StoredCase> find(const std::string& path, std::uint64_t id);

private:
    std::string path_;
    std::ofstream out_;
    std::mutex mutex_;
};

// Re-sends the exact stored bytes and classifies afresh.
SequenceOutcome replay_case(const StoredCase& c, const Endpoint& endpoint,
                            const TimeoutPolicy& policy);

} // namespace mbfuzz
