// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/feedback.hpp"

#include <sstream>
#include <stdexcept>

#include "mbfuzz/util.hpp"

namespace mbfuzz {

FailureStats FailureStats::for_states(const std::vector<std::string>& states) {
    FailureStats stats;
    for (const auto& s : states) stats.per_state[s];
    return stats;
}

FailureStats accumulate(FailureStats stats, const MessageSequence& seq,
                        const SequenceOutcome& outcome) {
    if (seq.id != outcome.sequence_id)
        throw std::invalid_argument("accumulate: outcome " + std::to_string(outcome.sequence_id) +
                                    " does not belong to sequence " + std::to_string(seq.id));
    for (const auto& mo : outcome.messages) {
        auto& tally = stats.per_state[mo.state];
        tally.requests += 1;
        stats.messages += 1;
        if (is_failure(mo.outcome.cls)) {
            tally.failures += 1;
            stats.failures += 1;
        }
        int first_byte = mo.outcome.response_bytes.empty()
                             ? -1
                             : static_cast<int>(mo.outcome.response_bytes.front());
        stats.distinct_responses.insert({mo.state, first_byte, to_string(mo.outcome.cls)});
    }
    stats.sequences += 1;
    if (outcome.crashed) stats.crashes += 1;
    return stats;
}

ResultSummary summarize(const FailureStats& stats) {
    if (stats.messages == 0)
        throw std::invalid_argument("summarize: no messages recorded");

    std::ostringstream out;
    for (const auto& [state, tally] : stats.per_state) { // std::map: sorted by name
        out << state << ": requests=" << tally.requests << " failures=" << tally.failures
            << " rate=";
        if (tally.requests == 0)
            out << "n/a";
        else
            out << format_fixed(static_cast<double>(tally.failures) /
                                    static_cast<double>(tally.requests),
                                4);
        out << '\n';
    }
    out << "totals: sequences=" << stats.sequences << " messages=" << stats.messages
        << " failures=" << stats.failures << " rate=" << format_fixed(stats.overall_failure_rate(), 4)
        << " crashes=" << stats.crashes << " distinct_responses=" << stats.distinct_responses.size()
        << '\n';

    return ResultSummary{stats, out.str()};
}

nlohmann::json stats_to_json(const FailureStats& stats) {
    nlohmann::json states = nlohmann::json::object();
    for (const auto& [state, tally] : stats.per_state) {
        nlohmann::json entry{{"requests", tally.requests}, {"failures", tally.failures}};
        if (tally.requests > 0)
            entry["rate"] = static_cast<double>(tally.failures) / static_cast<double>(tally.requests);
        else
            entry["rate"] = nullptr;
        states[state] = std::move(entry);
    }
    return nlohmann::json{{"states", std::move(states)},
                          {"sequences", stats.sequences},
                          {"messages", stats.messages},
                          {"failures", stats.failures},
                          {"overall_failure_rate", stats.overall_failure_rate()},
                          {"crashes", stats.crashes},
                          {"distinct_responses", stats.distinct_responses.size()}};
}

} // namespace mbfuzz
