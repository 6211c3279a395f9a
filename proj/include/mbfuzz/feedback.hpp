// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "mbfuzz/harness.hpp"
#include "mbfuzz/seqgen.hpp"

namespace mbfuzz {

struct StateTally {
    std::uint64_t requests = 0;
    std::uint64_t failures = 0;

    friend bool operator==(const StateTally&, const StateTally&) = default;
};

// Per-state failure statistics keyed on the abstract state (protocol
// function). Distinct responses are (state, first response byte or -1,
// outcome class) triples.
struct FailureStats {
    std::map<std::string, StateTally> per_state;
    std::uint64_t sequences = 0;
    std::uint64_t messages = 0;
    std::uint64_t failures = 0;
    std::uint64_t crashes = 0;
    std::set<std::tuple<std::string, int, std::string>> distinct_responses;

    // Seeds zero tallies so the summary mentions every selected state.
    static FailureStats for_states(const std::vector<std::string>& states);

    double overall_failure_rate() const {
        return messages ? static_cast<double>(failures) / static_cast<double>(messages) : 0.0;
    }

    friend bool operator==(const FailureStats&, const FailureStats&) = default;
};

// Folds one executed sequence into the stats. Timeout, ConnectionReset,
// SendFailed and TargetDown count as failures; only sent messages count at
// all. Throws std::invalid_argument when outcome.sequence_id != seq.id.
FailureStats accumulate(FailureStats stats, const MessageSequence& seq,
                        const SequenceOutcome& outcome);

struct ResultSummary {
    FailureStats stats;
    std::string text; // deterministic rendering, embedded in the adjustment prompt
};

// One line per state sorted by name ("S: requests=N failures=N rate=R") with
// rates to 4 decimals ("n/a" at zero requests), then a single totals line.
// Throws std::invalid_argument when no message has been recorded.
ResultSummary summarize(const FailureStats& stats);

nlohmann::json stats_to_json(const FailureStats& stats);

} // namespace mbfuzz
