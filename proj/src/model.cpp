// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/model.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mbfuzz/errors.hpp"

namespace mbfuzz {

const char* to_string(DecisionKind kind) {
    switch (kind) {
    case DecisionKind::Add: return "ADD";
    case DecisionKind::Delete: return "DELETE";
    case DecisionKind::Keep: return "KEEP";
    }
    return "?";
}

static bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

ValidationReport validate_model(const StateModel& model) {
    ValidationReport report;
    auto violate = [&](std::string rule, std::string message) {
        report.violations.push_back({std::move(rule), std::move(message)});
    };

    if (model.selected_states.empty())
        violate("empty-selected", "selected_states is empty");

    std::set<std::string> selected;
    for (const auto& s : model.selected_states) {
        if (!selected.insert(s).second)
            violate("duplicate-selected", "state '" + s + "' appears twice in selected_states");
        if (!contains(model.candidate_states, s))
            violate("selected-not-candidate", "selected state '" + s + "' is not a candidate");
    }

    if (!selected.count(model.initial_state))
        violate("initial-not-selected",
                "initial state '" + model.initial_state + "' is not in selected_states");

    for (const auto& [source, edges] : model.transitions) {
        if (!selected.count(source))
            violate("unknown-transition-source", "transition source '" + source + "' not selected");
        for (const auto& edge : edges) {
            if (!selected.count(edge.target))
                violate("unknown-transition-target",
                        "transition " + source + " -> '" + edge.target + "' targets an unselected state");
            if (edge.weight <= 0)
                violate("nonpositive-weight", "transition " + source + " -> " + edge.target +
                                                  " has weight " + std::to_string(edge.weight));
        }
    }

    if (!(model.stop_probability >= 0.0 && model.stop_probability <= 1.0))
        violate("stop-probability-range", "stop_probability outside [0,1]");

    std::string terminal;
    if (model.reconnect_rule) {
        terminal = model.reconnect_rule->state;
        if (!selected.count(terminal))
            violate("reconnect-state-unknown",
                    "reconnect rule names unselected state '" + terminal + "'");
        double p = model.reconnect_rule->reenter_probability;
        if (!(p >= 0.0 && p <= 1.0))
            violate("reconnect-probability-range", "reenter_probability outside [0,1]");
    }

    // Every state the generator can be asked to continue from needs a way out:
    // outgoing edges, the reconnect rule, or a stop probability of 1.
    if (model.stop_probability < 1.0) {
        for (const auto& s : model.selected_states) {
            if (s == terminal) continue;
            auto it = model.transitions.find(s);
            if (it == model.transitions.end() || it->second.empty())
                violate("dead-end-state", "state '" + s + "' has no outgoing transition");
        }
    }

    return report;
}

StateModel apply_adjustment(const StateModel& model, const AdvisorDecision& decision) {
    switch (decision.kind) {
    case DecisionKind::Keep:
        return model;

    case DecisionKind::Add: {
        const std::string& state = decision.state;
        if (!contains(model.candidate_states, state))
            throw std::invalid_argument("ADD rejected: '" + state + "' is not a candidate state");
        if (contains(model.selected_states, state))
            throw std::invalid_argument("ADD rejected: '" + state + "' is already selected");

        StateModel next = model;
        // Default edge synthesis; the orchestrator may re-propose the topology.
        for (const auto& existing : model.selected_states)
            next.transitions[existing].push_back({state, 1});
        next.transitions[state] = {{model.initial_state, 1}};
        next.selected_states.push_back(state);
        return next;
    }

    case DecisionKind::Delete: {
        const std::string& state = decision.state;
        if (state == model.initial_state)
            throw std::invalid_argument("DELETE rejected: cannot remove the initial state");
        if (!contains(model.selected_states, state))
            throw std::invalid_argument("DELETE rejected: '" + state + "' is not selected");

        StateModel next = model;
        std::erase(next.selected_states, state);
        next.transitions.erase(state);
        for (auto& [source, edges] : next.transitions) {
            bool had_edges = !edges.empty();
            std::erase_if(edges, [&](const Transition& t) { return t.target == state; });
            if (had_edges && edges.empty())
                edges.push_back({next.initial_state, 1}); // orphaned source
        }
        if (next.reconnect_rule && next.reconnect_rule->state == state)
            next.reconnect_rule.reset();
        return next;
    }
    }
    throw std::invalid_argument("unknown decision kind");
}

StateModel reset_to_initial(const StateModel& /*current*/, const StateModel& snapshot) {
    return snapshot;
}

nlohmann::json model_to_json(const StateModel& model) {
    nlohmann::json transitions = nlohmann::json::object();
    for (const auto& [source, edges] : model.transitions) {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& edge : edges) list.push_back({edge.target, edge.weight});
        transitions[source] = std::move(list);
    }
    nlohmann::json doc{{"protocol", model.protocol},
                       {"candidate_states", model.candidate_states},
                       {"selected_states", model.selected_states},
                       {"initial_state", model.initial_state},
                       {"transitions", std::move(transitions)},
                       {"stop_probability", model.stop_probability}};
    if (model.reconnect_rule)
        doc["reconnect_rule"] = {{"state", model.reconnect_rule->state},
                                 {"reenter_probability", model.reconnect_rule->reenter_probability}};
    return doc;
}

StateModel model_from_json(const nlohmann::json& doc) {
    try {
        StateModel model;
        model.protocol = doc.at("protocol").get<std::string>();
        model.candidate_states = doc.at("candidate_states").get<std::vector<std::string>>();
        model.selected_states = doc.at("selected_states").get<std::vector<std::string>>();
        model.initial_state = doc.at("initial_state").get<std::string>();
        for (const auto& [source, edges] : doc.at("transitions").items()) {
            std::vector<Transition> list;
            for (const auto& edge : edges) {
                if (!edge.is_array() || edge.size() != 2)
                    throw CodecError("transition edge must be a [target, weight] pair");
                list.push_back({edge.at(0).get<std::string>(), edge.at(1).get<int>()});
            }
            model.transitions[source] = std::move(list);
        }
        model.stop_probability = doc.at("stop_probability").get<double>();
        if (doc.contains("reconnect_rule") && !doc["reconnect_rule"].is_null()) {
            ReconnectRule rule;
            rule.state = doc["reconnect_rule"].at("state").get<std::string>();
            rule.reenter_probability =
                doc["reconnect_rule"].at("reenter_probability").get<double>();
            model.reconnect_rule = rule;
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw CodecError(std::string("bad model document: ") + e.what());
    }
}

StateModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse model file " + path + ": " + e.what());
    }
    return model_from_json(doc);
}

void save_model_file(const StateModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write model file: " + path);
    out << model_to_json(model).dump(2) << '\n';
}

} // namespace mbfuzz
