// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/seqgen.hpp"

#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace mbfuzz {

std::vector<std::string> sample_states(const StateModel& model, Rng& rng) {
    std::vector<std::string> states;
    states.push_back(model.initial_state);
    if (rng.chance(model.stop_probability)) return states;

    const std::string* current = &states.back();
    while (states.size() < kMaxSequenceLength) {
        std::string next;
        if (model.reconnect_rule && *current == model.reconnect_rule->state) {
            if (!rng.chance(model.reconnect_rule->reenter_probability)) return states;
            next = model.initial_state;
        } else {
            auto it = model.transitions.find(*current);
            if (it == model.transitions.end() || it->second.empty())
                throw std::logic_error("generate_sequence: dead-end state '" + *current +
                                       "' (model invalid)");
            std::vector<int> weights;
            weights.reserve(it->second.size());
            for (const auto& edge : it->second) weights.push_back(edge.weight);
            next = it->second[rng.weighted_index(weights)].target;
        }
        states.push_back(std::move(next));
        current = &states.back();
        if (rng.chance(model.stop_probability)) return states;
    }
    return states; // cap hit
}

MessageSequence generate_sequence(const StateModel& model, std::uint64_t seed, std::uint64_t id) {
    Rng rng(seed);
    return MessageSequence{id, sample_states(model, rng), seed};
}

std::vector<MessageSequence> generate_batch(const StateModel& model, std::size_t n,
                                            std::uint64_t master_seed, std::uint64_t id_base) {
    if (n == 0) throw std::invalid_argument("generate_batch: n must be >= 1");
    ValidationReport report = validate_model(model);
    if (!report.ok())
        throw std::invalid_argument("generate_batch: model invalid: " +
                                    report.violations.front().message);

    std::vector<MessageSequence> batch;
    batch.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        batch.push_back(generate_sequence(model, derive_seed(master_seed, i), id_base + i));
    return batch;
}

BatchStats batch_stats(std::span<const MessageSequence> batch,
                       std::span<const std::size_t> encoded_lengths) {
    if (batch.empty()) throw std::invalid_argument("batch_stats: empty batch");
    if (batch.size() != encoded_lengths.size())
        throw std::invalid_argument("batch_stats: lengths not aligned with batch");

    // Uniqueness is over the abstract state list; '\x1f' cannot occur in names.
    std::unordered_set<std::string> seen;
    seen.reserve(batch.size());
    for (const auto& seq : batch) {
        std::string key;
        for (const auto& s : seq.states) {
            key += s;
            key += '\x1f';
        }
        seen.insert(std::move(key));
    }

    double total_len = 0;
    for (std::size_t len : encoded_lengths) total_len += static_cast<double>(len);

    BatchStats stats;
    stats.total_cases = batch.size();
    stats.unique_cases = seen.size();
    stats.avg_length = total_len / static_cast<double>(batch.size());
    return stats;
}

void write_batch_jsonl(std::span<const MessageSequence> batch, std::ostream& out) {
    for (const auto& seq : batch) {
        nlohmann::json line{{"id", seq.id}, {"seed", seq.seed}, {"states", seq.states}};
        out << line.dump() << '\n';
    }
}

} // namespace mbfuzz
