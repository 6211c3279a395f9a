// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mbfuzz {

// At the named state the generator flips a coin: re-enter the initial state
// with reenter_probability, otherwise the sequence ends there.
struct ReconnectRule {
    std::string state;
    double reenter_probability = 0.5;

    friend bool operator==(const ReconnectRule&, const ReconnectRule&) = default;
};

struct Transition {
    std::string target;
    int weight = 1; // positive integer, normalized at sampling time

    friend bool operator==(const Transition&, const Transition&) = default;
};

// Coarse-grained protocol state model. Immutable by convention: every
// operation returns a new value, so models are safe to share across workers.
struct StateModel {
    std::string protocol;
    std::vector<std::string> candidate_states; // full universe
    std::vector<std::string> selected_states;  // subset in play
    std::string initial_state;                 // first element of every sequence
    std::map<std::string, std::vector<Transition>> transitions;
    double stop_probability = 0.5;
    std::optional<ReconnectRule> reconnect_rule;

    friend bool operator==(const StateModel&, const StateModel&) = default;
};

struct Violation {
    std::string rule;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// Returns every invariant violation; never mutates the input.
ValidationReport validate_model(const StateModel& model);

enum class DecisionKind { Add, Delete, Keep };

const char* to_string(DecisionKind kind);

// Validated ADD/DELETE/KEEP adjustment. `raw_reply` keeps the unparsed advisor
// output for audit.
struct AdvisorDecision {
    DecisionKind kind = DecisionKind::Keep;
    std::string state;  // empty for Keep
    std::string reason;
    std::string raw_reply;
};

// ADD inserts the state with default transitions (uniform edges from every
// existing state into it, and from it back to the initial state) unless the
// advisor re-proposes the topology afterwards. DELETE removes the state and
// every edge touching it, redirecting orphaned sources to the initial state.
// Throws std::invalid_argument on DELETE of the initial state or ADD of a
// non-candidate.
StateModel apply_adjustment(const StateModel& model, const AdvisorDecision& decision);

// Random restart: discard all accumulated adjustments.
StateModel reset_to_initial(const StateModel& current, const StateModel& snapshot);

// Model document JSON (also the advisor's output schema):
//   {"protocol":..., "candidate_states":[...], "selected_states":[...],
//    "initial_state":..., "transitions":{"S":[["T",70],...]},
//    "stop_probability":0.5, "reconnect_rule":{"state":...,"reenter_probability":...}}
nlohmann::json model_to_json(const StateModel& model);
StateModel model_from_json(const nlohmann::json& doc); // throws CodecError on shape errors

StateModel load_model_file(const std::string& path);
void save_model_file(const StateModel& model, const std::string& path);

} // namespace mbfuzz
