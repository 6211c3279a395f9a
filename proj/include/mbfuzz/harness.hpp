// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "mbfuzz/message.hpp"
#include "mbfuzz/net.hpp"

namespace mbfuzz {

enum class OutcomeClass { ResponseReceived, Timeout, ConnectionReset, SendFailed, TargetDown };

const char* to_string(OutcomeClass cls);
bool is_failure(OutcomeClass cls); // everything but ResponseReceived

struct Outcome {
    OutcomeClass cls = OutcomeClass::Timeout;
    std::vector<std::uint8_t> response_bytes; // only for ResponseReceived
    std::chrono::microseconds latency{0};
};

struct MessageOutcome {
    std::string state;
    Outcome outcome;
};

struct SequenceOutcome {
    std::uint64_t sequence_id = 0;
    std::vector<MessageOutcome> messages; // <= sequence length; truncated on early abort
    bool crashed = false;                 // liveness probe failed after the sequence
    bool aborted = false;                 // not every message was attempted
};

struct TimeoutPolicy {
    int connect_timeout_ms = 1000;
    int read_timeout_ms = 200;
    int probe_retries = 3; // total connect attempts
    int probe_backoff_ms = 250;
    int probe_connect_timeout_ms = 250;
};

// One TCP connection for the whole sequence; messages sent in order, each
// followed by a classified read. ConnectionReset and TargetDown stop the
// sequence; Timeout and SendFailed do not. Afterwards the liveness probe sets
// `crashed` (skippable for callers that probe themselves). When traffic_mutex
// is given, traffic holds it shared and the probe exclusively, so probes
// never overlap in-flight sequences.
SequenceOutcome run_sequence(const Endpoint& endpoint, std::uint64_t sequence_id,
                             std::span<const EncodedMessage> messages, const TimeoutPolicy& policy,
                             std::shared_mutex* traffic_mutex = nullptr, bool probe_after = true);

// True iff a fresh connect succeeds within the retry/backoff budget.
bool probe_liveness(const Endpoint& endpoint, const TimeoutPolicy& policy);

} // namespace mbfuzz
