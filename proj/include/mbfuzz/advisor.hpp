// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mbfuzz/backend.hpp"
#include "mbfuzz/feedback.hpp"
#include "mbfuzz/model.hpp"
#include "mbfuzz/prompts.hpp"

namespace mbfuzz {

struct SelectedState {
    std::string state;
    std::string reason;
};

struct SelectionResult {
    std::vector<SelectedState> states;

    std::vector<std::string> names() const;
};

// Model-construction and adjustment brain. Implementations return only
// validated output; nothing an advisor says reaches the model unchecked.
class Advisor {
public:
    virtual ~Advisor() = default;

    // Exactly k distinct states out of candidates.
    virtual SelectionResult select_states(const std::vector<std::string>& candidates,
                                          std::size_t k, const std::string& protocol) = 0;

    // A model over exactly the selected states that passes validate_model.
    virtual StateModel propose_model(const SelectionResult& selection, const std::string& protocol,
                                     const std::vector<std::string>& candidates) = 0;

    // ADD/DELETE/KEEP; falls back to KEEP ("advisor unparseable") instead of
    // failing the campaign on noisy replies.
    virtual AdvisorDecision decide_adjustment(const ResultSummary& summary,
                                              const StateModel& model) = 0;

    // Optional documentation-driven expansion of the candidate universe.
    // Returned list always contains the seed states; capped.
    virtual std::vector<std::string> augment_candidates(const std::vector<std::string>& seed,
                                                        const std::string& /*protocol*/,
                                                        std::size_t /*cap*/) {
        return seed;
    }
};

struct HeuristicThresholds {
    double delete_rate = 0.9;            // DELETE a state failing above this...
    std::uint64_t delete_min_requests = 100; // ...with at least this many requests
    double add_overall_rate = 0.01;      // ADD when the overall rate is below this
};

// Priority order used to rank MQTT-ish candidates; unknown names keep their
// original order after the known ones.
const std::vector<std::string>& core_state_priority();

// Deterministic, LLM-free advisor: priority-table selection, a fixed fan-out
// topology, and threshold-based adjustment decisions.
class HeuristicAdvisor : public Advisor {
public:
    explicit HeuristicAdvisor(HeuristicThresholds thresholds = {});

    SelectionResult select_states(const std::vector<std::string>& candidates, std::size_t k,
                                  const std::string& protocol) override;
    StateModel propose_model(const SelectionResult& selection, const std::string& protocol,
                             const std::vector<std::string>& candidates) override;
    AdvisorDecision decide_adjustment(const ResultSummary& summary,
                                      const StateModel& model) override;

private:
    HeuristicThresholds thresholds_;
};

// Prompt-driven advisor over any ChatBackend (live HTTP or scripted mock).
// Invalid replies get one corrective reprompt; selection and proposal then
// hard-error, adjustment degrades to KEEP.
class ChatAdvisor : public Advisor {
public:
    explicit ChatAdvisor(ChatBackend& backend,
                         std::map<std::string, PromptTemplate> templates = default_prompts(),
                         double temperature = 0.5);

    SelectionResult select_states(const std::vector<std::string>& candidates, std::size_t k,
                                  const std::string& protocol) override;
    StateModel propose_model(const SelectionResult& selection, const std::string& protocol,
                             const std::vector<std::string>& candidates) override;
    AdvisorDecision decide_adjustment(const ResultSummary& summary,
                                      const StateModel& model) override;
    std::vector<std::string> augment_candidates(const std::vector<std::string>& seed,
                                                const std::string& protocol,
                                                std::size_t cap) override;

private:
    std::string chat(const std::string& template_id, const std::string& prompt);
    const PromptTemplate& tpl(const std::string& id) const;

    ChatBackend& backend_;
    std::map<std::string, PromptTemplate> templates_;
    double temperature_;
    std::optional<std::string> generation_instruction_; // autoprompt result, reused
};

// First well-formed JSON value embedded in free text, if any.
std::optional<nlohmann::json> extract_first_json(const std::string& text);

} // namespace mbfuzz
