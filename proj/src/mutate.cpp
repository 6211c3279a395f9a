// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/mutate.hpp"

#include <algorithm>
#include <stdexcept>

namespace mbfuzz {

const char* to_string(MutationKind kind) {
    switch (kind) {
    case MutationKind::Insert: return "insert";
    case MutationKind::Delete: return "delete";
    case MutationKind::Mutate: return "mutate";
    }
    return "?";
}

EncodedMessage mutate(EncodedMessage msg, Rng& rng, const MutationConfig& config) {
    double p_ins = config.insert_probability;
    double p_del = config.delete_probability;
    double p_mut = config.mutate_probability;
    if (p_ins < 0 || p_del < 0 || p_mut < 0 || p_ins + p_del + p_mut > 1.0)
        throw std::invalid_argument("mutation probabilities must be >= 0 and sum to <= 1");
    std::size_t max_chunk = config.max_chunk > 0 ? static_cast<std::size_t>(config.max_chunk) : 1;

    auto& bytes = msg.bytes;
    for (int round = 0; round < config.max_operations; ++round) {
        double u = rng.next_unit();
        if (u < p_ins) {
            MutationRecord rec;
            rec.kind = MutationKind::Insert;
            rec.offset = rng.next_below(bytes.size() + 1);
            rec.length = 1 + rng.next_below(max_chunk);
            rec.payload.reserve(rec.length);
            for (std::size_t i = 0; i < rec.length; ++i) rec.payload.push_back(rng.next_byte());
            bytes.insert(bytes.begin() + static_cast<std::ptrdiff_t>(rec.offset),
                         rec.payload.begin(), rec.payload.end());
            msg.mutations.push_back(std::move(rec));
        } else if (u < p_ins + p_del) {
            if (bytes.size() < 2) continue; // never empty the message
            MutationRecord rec;
            rec.kind = MutationKind::Delete;
            rec.offset = rng.next_below(bytes.size());
            std::size_t bound = std::min({max_chunk, bytes.size() - rec.offset, bytes.size() - 1});
            if (bound == 0) continue;
            rec.length = 1 + rng.next_below(bound);
            bytes.erase(bytes.begin() + static_cast<std::ptrdiff_t>(rec.offset),
                        bytes.begin() + static_cast<std::ptrdiff_t>(rec.offset + rec.length));
            msg.mutations.push_back(std::move(rec));
        } else if (u < p_ins + p_del + p_mut) {
            if (bytes.empty()) continue;
            MutationRecord rec;
            rec.kind = MutationKind::Mutate;
            rec.offset = rng.next_below(bytes.size());
            rec.length = 1 + rng.next_below(std::min(max_chunk, bytes.size() - rec.offset));
            rec.payload.reserve(rec.length);
            for (std::size_t i = 0; i < rec.length; ++i) {
                std::uint8_t b = rng.next_byte();
                bytes[rec.offset + i] = b;
                rec.payload.push_back(b);
            }
            msg.mutations.push_back(std::move(rec));
        }
    }
    return msg;
}

std::vector<std::uint8_t> replay_mutations(std::vector<std::uint8_t> bytes,
                                           const std::vector<MutationRecord>& records) {
    for (const auto& rec : records) {
        switch (rec.kind) {
        case MutationKind::Insert:
            if (rec.offset > bytes.size())
                throw std::invalid_argument("replay: insert offset out of range");
            bytes.insert(bytes.begin() + static_cast<std::ptrdiff_t>(rec.offset),
                         rec.payload.begin(), rec.payload.end());
            break;
        case MutationKind::Delete:
            if (rec.offset + rec.length > bytes.size())
                throw std::invalid_argument("replay: delete range out of range");
            bytes.erase(bytes.begin() + static_cast<std::ptrdiff_t>(rec.offset),
                        bytes.begin() + static_cast<std::ptrdiff_t>(rec.offset + rec.length));
            break;
        case MutationKind::Mutate:
            if (rec.offset + rec.length > bytes.size())
                throw std::invalid_argument("replay: mutate range out of range");
            std::copy(rec.payload.begin(), rec.payload.end(),
                      bytes.begin() + static_cast<std::ptrdiff_t>(rec.offset));
            break;
        }
    }
    return bytes;
}

} // namespace mbfuzz
