// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/casestore.hpp"

#include <json.hpp>

#include "mbfuzz/errors.hpp"
#include "mbfuzz/util.hpp"

namespace mbfuzz {

std::uint64_t case_checksum(const StoredCase& c) {
    std::uint64_t h = fnv1a64(std::to_string(c.id) + "|" + std::to_string(c.seed));
    for (const auto& s : c.states) h = fnv1a64(s, h);
    for (const auto& m : c.messages) h = fnv1a64(std::span<const std::uint8_t>(m), h);
    return h;
}

CaseStore::CaseStore(std::string path, bool truncate) : path_(std::move(path)) {
    out_.open(path_, truncate ? std::ios::trunc : std::ios::app);
    if (!out_) throw StoreError("cannot open case store for writing: " + path_);
}

void CaseStore::append(StoredCase c) {
    c.timestamp = iso8601_now();
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : c.messages) messages.push_back(hex_encode(m));
    nlohmann::json record{{"id", c.id},
                          {"seed", c.seed},
                          {"states", c.states},
                          {"messages", std::move(messages)},
                          {"outcomes", c.outcome_classes},
                          {"crashed", c.crashed},
                          {"timestamp", c.timestamp},
                          {"checksum", case_checksum(c)}};
    std::lock_guard lock(mutex_);
    out_ << record.dump() << '\n';
    out_.flush();
}

static StoredCase parse_record(const std::string& line, std::size_t lineno) {
    nlohmann::json record;
    try {
        record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw StoreError("corrupt case store record at line " + std::to_string(lineno) + ": " +
                         e.what());
    }
    try {
        StoredCase c;
        c.id = record.at("id").get<std::uint64_t>();
        c.seed = record.at("seed").get<std::uint64_t>();
        c.states = record.at("states").get<std::vector<std::string>>();
        for (const auto& hex : record.at("messages"))
            c.messages.push_back(hex_decode(hex.get<std::string>()));
        c.outcome_classes = record.at("outcomes").get<std::vector<std::string>>();
        c.crashed = record.at("crashed").get<bool>();
        c.timestamp = record.at("timestamp").get<std::string>();
        if (record.at("checksum").get<std::uint64_t>() != case_checksum(c))
            throw StoreError("checksum mismatch for case " + std::to_string(c.id));
        return c;
    } catch (const StoreError&) {
        throw;
    } catch (const std::exception& e) {
        throw StoreError("corrupt case store record at line " + std::to_string(lineno) + ": " +
                         e.what());
    }
}

std::vector<StoredCase> CaseStore::read_all(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StoreError("cannot open case store: " + path);
    std::vector<StoredCase> cases;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        cases.push_back(parse_record(line, lineno));
    }
    return cases;
}

std::optional<StoredCase> CaseStore::find(const std::string& path, std::uint64_t id) {
    std::ifstream in(path);
    if (!in) throw StoreError("cannot open case store: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        StoredCase c = parse_record(line, lineno);
        if (c.id == id) return c;
    }
    return std::nullopt;
}

SequenceOutcome replay_case(const StoredCase& c, const Endpoint& endpoint,
                            const TimeoutPolicy& policy) {
    std::vector<EncodedMessage> messages;
    messages.reserve(c.messages.size());
    for (std::size_t i = 0; i < c.messages.size(); ++i) {
        EncodedMessage msg;
        msg.state = i < c.states.size() ? c.states[i] : "?";
        msg.bytes = c.messages[i];
        messages.push_back(std::move(msg));
    }
    return run_sequence(endpoint, c.id, messages, policy);
}

} // namespace mbfuzz
