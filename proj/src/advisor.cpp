// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/advisor.hpp"

#include <algorithm>
#include <set>

#include "mbfuzz/errors.hpp"
#include "mbfuzz/util.hpp"

namespace mbfuzz {

std::vector<std::string> SelectionResult::names() const {
    std::vector<std::string> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s.state);
    return out;
}

std::optional<nlohmann::json> extract_first_json(const std::string& text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{' && text[i] != '[') continue;
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t j = i; j < text.size(); ++j) {
            char c = text[j];
            if (in_string) {
                if (escaped)
                    escaped = false;
                else if (c == '\\')
                    escaped = true;
                else if (c == '"')
                    in_string = false;
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{' || c == '[') {
                ++depth;
            } else if (c == '}' || c == ']') {
                if (--depth == 0) {
                    try {
                        return nlohmann::json::parse(text.substr(i, j - i + 1));
                    } catch (const nlohmann::json::exception&) {
                        break; // not valid after all; try the next opener
                    }
                }
                if (depth < 0) break;
            }
        }
    }
    return std::nullopt;
}

const std::vector<std::string>& core_state_priority() {
    static const std::vector<std::string> order = {
        "CONNECT", "PUBLISH", "SUBSCRIBE",   "DISCONNECT", "CONNACK",
        "PUBACK",  "PINGREQ", "SUBACK",      "UNSUBSCRIBE", "UNSUBACK",
        "PUBREC",  "PUBREL",  "PUBCOMP",     "PINGRESP",    "AUTH",
    };
    return order;
}

namespace {

std::size_t priority_rank(const std::string& state) {
    const auto& order = core_state_priority();
    auto it = std::find(order.begin(), order.end(), state);
    return it == order.end() ? order.size() : static_cast<std::size_t>(it - order.begin());
}

std::vector<std::string> ranked(const std::vector<std::string>& candidates) {
    std::vector<std::string> out = candidates;
    std::stable_sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
        return priority_rank(a) < priority_rank(b);
    });
    return out;
}

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

} // namespace

// ---------------------------------------------------------------------------
// HeuristicAdvisor

HeuristicAdvisor::HeuristicAdvisor(HeuristicThresholds thresholds) : thresholds_(thresholds) {}

SelectionResult HeuristicAdvisor::select_states(const std::vector<std::string>& candidates,
                                                std::size_t k, const std::string& protocol) {
    if (k == 0 || k > candidates.size())
        throw AdvisorError("select_states: k=" + std::to_string(k) + " out of range for " +
                           std::to_string(candidates.size()) + " candidates");
    SelectionResult result;
    auto order = ranked(candidates);
    for (std::size_t i = 0; i < k; ++i)
        result.states.push_back(
            {order[i], "priority rank " + std::to_string(i + 1) + " for " + protocol + " testing"});
    return result;
}

StateModel HeuristicAdvisor::propose_model(const SelectionResult& selection,
                                           const std::string& protocol,
                                           const std::vector<std::string>& candidates) {
    auto names = selection.names();
    if (names.empty()) throw AdvisorError("propose_model: empty selection");

    StateModel model;
    model.protocol = protocol;
    model.candidate_states = candidates;
    model.selected_states = names;
    model.initial_state = names.front();
    model.stop_probability = 0.5;

    // Fixed topology: initial fans out uniformly, everything drains into the
    // terminal, the terminal may loop back to the initial state.
    std::string terminal = names.back();
    if (auto it = std::find(names.begin(), names.end(), "DISCONNECT"); it != names.end())
        terminal = *it;
    model.reconnect_rule = ReconnectRule{terminal, 0.5};

    for (const auto& s : names) {
        if (s == model.initial_state && names.size() > 1) {
            for (const auto& t : names)
                if (t != model.initial_state) model.transitions[s].push_back({t, 1});
        } else if (s != terminal) {
            model.transitions[s].push_back({terminal, 1});
        }
    }
    return model;
}

AdvisorDecision HeuristicAdvisor::decide_adjustment(const ResultSummary& summary,
                                                    const StateModel& model) {
    const FailureStats& stats = summary.stats;

    const std::string* worst = nullptr;
    double worst_rate = 0.0;
    std::uint64_t worst_requests = 0;
    for (const auto& [state, tally] : stats.per_state) {
        if (state == model.initial_state) continue;
        if (std::find(model.selected_states.begin(), model.selected_states.end(), state) ==
            model.selected_states.end())
            continue;
        if (tally.requests < thresholds_.delete_min_requests) continue;
        double rate = static_cast<double>(tally.failures) / static_cast<double>(tally.requests);
        if (rate <= thresholds_.delete_rate) continue;
        if (!worst || rate > worst_rate || (rate == worst_rate && tally.requests > worst_requests)) {
            worst = &state;
            worst_rate = rate;
            worst_requests = tally.requests;
        }
    }
    if (worst) {
        AdvisorDecision decision;
        decision.kind = DecisionKind::Delete;
        decision.state = *worst;
        decision.reason = "failure rate " + format_fixed(worst_rate, 4) + " over " +
                          std::to_string(worst_requests) + " requests exceeds " +
                          format_fixed(thresholds_.delete_rate, 2);
        return decision;
    }

    if (stats.overall_failure_rate() < thresholds_.add_overall_rate) {
        for (const auto& candidate : ranked(model.candidate_states)) {
            if (std::find(model.selected_states.begin(), model.selected_states.end(), candidate) !=
                model.selected_states.end())
                continue;
            AdvisorDecision decision;
            decision.kind = DecisionKind::Add;
            decision.state = candidate;
            decision.reason = "overall failure rate " +
                              format_fixed(stats.overall_failure_rate(), 4) + " below " +
                              format_fixed(thresholds_.add_overall_rate, 2) +
                              "; widening the search space";
            return decision;
        }
    }

    AdvisorDecision decision;
    decision.kind = DecisionKind::Keep;
    decision.reason = "no state crossed the adjustment thresholds";
    return decision;
}

// ---------------------------------------------------------------------------
// ChatAdvisor

ChatAdvisor::ChatAdvisor(ChatBackend& backend, std::map<std::string, PromptTemplate> templates,
                         double temperature)
    : backend_(backend), templates_(std::move(templates)), temperature_(temperature) {}

const PromptTemplate& ChatAdvisor::tpl(const std::string& id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw AdvisorError("missing prompt template '" + id + "'");
    return it->second;
}

std::string ChatAdvisor::chat(const std::string& template_id, const std::string& prompt) {
    return backend_.chat(prompt, ChatParams{template_id, temperature_});
}

static std::string reprompt_prefix(const std::string& why) {
    return "Your previous reply was invalid: " + why +
           ". Answer the original request again, exactly as specified.\n\n";
}

SelectionResult ChatAdvisor::select_states(const std::vector<std::string>& candidates,
                                           std::size_t k, const std::string& protocol) {
    if (k == 0 || k > candidates.size())
        throw AdvisorError("select_states: k=" + std::to_string(k) + " out of range for " +
                           std::to_string(candidates.size()) + " candidates");

    std::string example =
        render(tpl("selection_format"), {{"number", std::to_string(k)}, {"protocol", protocol}});
    std::string prompt = render(tpl("state_selection"), {{"states", join(candidates, ", ")},
                                                         {"protocol", protocol},
                                                         {"number", std::to_string(k)},
                                                         {"example", example}});

    auto attempt = [&](const std::string& reply,
                       std::string& why) -> std::optional<SelectionResult> {
        auto doc = extract_first_json(reply);
        if (!doc || !doc->is_array()) {
            why = "no JSON array found";
            return std::nullopt;
        }
        if (doc->size() != k) {
            why = "expected " + std::to_string(k) + " entries, got " + std::to_string(doc->size());
            return std::nullopt;
        }
        SelectionResult result;
        std::set<std::string> seen;
        for (const auto& item : *doc) {
            if (!item.is_object() || !item.contains("select") || !item["select"].is_string()) {
                why = "entries must be objects with a \"select\" field";
                return std::nullopt;
            }
            std::string state = item["select"].get<std::string>();
            if (std::find(candidates.begin(), candidates.end(), state) == candidates.end()) {
                why = "state \"" + state + "\" is not a candidate";
                return std::nullopt;
            }
            if (!seen.insert(state).second) {
                why = "state \"" + state + "\" listed twice";
                return std::nullopt;
            }
            result.states.push_back({state, item.value("reason", "")});
        }
        return result;
    };

    std::string why;
    if (auto result = attempt(chat("state_selection", prompt), why)) return *result;
    if (auto result = attempt(chat("state_selection", reprompt_prefix(why) + prompt), why))
        return *result;
    throw AdvisorError("state selection failed after reprompt: " + why);
}

StateModel ChatAdvisor::propose_model(const SelectionResult& selection, const std::string& protocol,
                                      const std::vector<std::string>& candidates) {
    auto names = selection.names();
    if (names.empty()) throw AdvisorError("propose_model: empty selection");

    // Autoprompting: distill the generation instruction once, reuse it for
    // every later re-proposal.
    if (!generation_instruction_) {
        std::string prompt = render(tpl("autoprompt_instruction"),
                                    {{"protocol", protocol}, {"states", join(names, ", ")}});
        generation_instruction_ = trim(chat("autoprompt_instruction", prompt));
    }

    std::string prompt = render(tpl("model_document"), {{"instruction", *generation_instruction_},
                                                        {"protocol", protocol},
                                                        {"states", join(names, ", ")}});

    std::set<std::string> expected(names.begin(), names.end());
    auto attempt = [&](const std::string& reply, std::string& why) -> std::optional<StateModel> {
        auto doc = extract_first_json(reply);
        if (!doc || !doc->is_object()) {
            why = "no JSON object found";
            return std::nullopt;
        }
        StateModel model;
        try {
            model = model_from_json(*doc);
        } catch (const CodecError& e) {
            why = e.what();
            return std::nullopt;
        }
        // The advisor does not own the universe.
        model.protocol = protocol;
        model.candidate_states = candidates;
        std::set<std::string> got(model.selected_states.begin(), model.selected_states.end());
        if (got != expected) {
            why = "selected_states must be exactly the requested states";
            return std::nullopt;
        }
        ValidationReport report = validate_model(model);
        if (!report.ok()) {
            why = report.violations.front().rule + ": " + report.violations.front().message;
            return std::nullopt;
        }
        return model;
    };

    std::string why;
    if (auto model = attempt(chat("model_document", prompt), why)) return *model;
    if (auto model = attempt(chat("model_document", reprompt_prefix(why) + prompt), why))
        return *model;
    throw AdvisorError("model proposal failed after reprompt: " + why);
}

AdvisorDecision ChatAdvisor::decide_adjustment(const ResultSummary& summary,
                                               const StateModel& model) {
    std::string prompt =
        render(tpl("adjustment_decision"), {{"result_summary", summary.text},
                                            {"protocol", model.protocol},
                                            {"states", join(model.selected_states, ", ")}});

    AdvisorDecision decision;
    auto keep_fallback = [&](const std::string& raw) {
        AdvisorDecision keep;
        keep.kind = DecisionKind::Keep;
        keep.reason = "advisor unparseable";
        keep.raw_reply = raw;
        return keep;
    };

    auto parse_decision = [&](const std::string& reply, std::string& why,
                              std::string& reason) -> std::optional<DecisionKind> {
        auto doc = extract_first_json(reply);
        if (!doc || !doc->is_object() || !doc->contains("decision") ||
            !(*doc)["decision"].is_string()) {
            why = "expected a JSON object with a \"decision\" field";
            return std::nullopt;
        }
        reason = doc->value("reason", "");
        std::string verdict = upper(trim((*doc)["decision"].get<std::string>()));
        if (verdict == "ADD") return DecisionKind::Add;
        if (verdict == "DELETE" || verdict == "REMOVE") return DecisionKind::Delete;
        if (verdict == "KEEP" || verdict == "NONE") return DecisionKind::Keep;
        why = "decision must be ADD or DELETE, got \"" + verdict + "\"";
        return std::nullopt;
    };

    std::string raw = chat("adjustment_decision", prompt);
    std::string why;
    std::string reason;
    auto kind = parse_decision(raw, why, reason);
    if (!kind) {
        std::string retry = chat("adjustment_decision", reprompt_prefix(why) + prompt);
        raw += "\n---\n" + retry;
        kind = parse_decision(retry, why, reason);
        if (!kind) return keep_fallback(raw);
    }
    decision.kind = *kind;
    decision.reason = reason;
    decision.raw_reply = raw;
    if (decision.kind == DecisionKind::Keep) return decision;

    // Follow-up exchange names the state. ADD picks from previously
    // unselected candidates, DELETE from the selected set minus the initial.
    std::vector<std::string> pool;
    std::string follow_tpl;
    std::map<std::string, std::string> bindings{{"protocol", model.protocol}};
    if (decision.kind == DecisionKind::Add) {
        for (const auto& c : model.candidate_states)
            if (std::find(model.selected_states.begin(), model.selected_states.end(), c) ==
                model.selected_states.end())
                pool.push_back(c);
        follow_tpl = "adjustment_add_state";
    } else {
        for (const auto& s : model.selected_states)
            if (s != model.initial_state) pool.push_back(s);
        follow_tpl = "adjustment_delete_state";
        bindings["result_summary"] = summary.text;
    }
    if (pool.empty()) {
        decision.kind = DecisionKind::Keep;
        decision.reason = "no eligible state for " + std::string(to_string(*kind));
        return decision;
    }
    bindings["candidates"] = join(pool, ", ");
    std::string follow_prompt = render(tpl(follow_tpl), bindings);

    auto parse_state = [&](const std::string& reply, std::string& fail) -> std::optional<std::string> {
        auto doc = extract_first_json(reply);
        std::string state;
        if (doc && doc->is_object() && doc->contains("state") && (*doc)["state"].is_string())
            state = (*doc)["state"].get<std::string>();
        else if (doc && doc->is_string())
            state = doc->get<std::string>();
        else {
            fail = "expected a JSON object with a \"state\" field";
            return std::nullopt;
        }
        if (std::find(pool.begin(), pool.end(), state) == pool.end()) {
            fail = "state \"" + state + "\" is not an eligible choice";
            return std::nullopt;
        }
        return state;
    };

    std::string reply = chat(follow_tpl, follow_prompt);
    decision.raw_reply += "\n---\n" + reply;
    std::string fail;
    auto state = parse_state(reply, fail);
    if (!state) {
        std::string retry = chat(follow_tpl, reprompt_prefix(fail) + follow_prompt);
        decision.raw_reply += "\n---\n" + retry;
        state = parse_state(retry, fail);
        if (!state) return keep_fallback(decision.raw_reply);
    }
    decision.state = *state;
    return decision;
}

std::vector<std::string> ChatAdvisor::augment_candidates(const std::vector<std::string>& seed,
                                                         const std::string& protocol,
                                                         std::size_t cap) {
    std::string prompt = render(tpl("candidate_augmentation"),
                                {{"protocol", protocol}, {"states", join(seed, ", ")}});
    auto merge = [&](const std::string& reply) -> std::optional<std::vector<std::string>> {
        auto doc = extract_first_json(reply);
        if (!doc || !doc->is_array()) return std::nullopt;
        std::vector<std::string> merged = seed;
        std::set<std::string> known(seed.begin(), seed.end());
        for (const auto& item : *doc) {
            if (!item.is_string()) return std::nullopt;
            std::string state = trim(item.get<std::string>());
            if (state.empty() || known.count(state)) continue;
            if (merged.size() >= cap) break;
            merged.push_back(state);
            known.insert(state);
        }
        return merged;
    };

    if (auto merged = merge(chat("candidate_augmentation", prompt))) return *merged;
    if (auto merged = merge(chat("candidate_augmentation",
                                 reprompt_prefix("expected a JSON array of strings") + prompt)))
        return *merged;
    return seed; // best effort; the shipped fixtures stay authoritative
}

} // namespace mbfuzz
