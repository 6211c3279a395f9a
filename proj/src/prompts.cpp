// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/prompts.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mbfuzz/errors.hpp"

namespace mbfuzz {

std::string render(const PromptTemplate& tpl, const std::map<std::string, std::string>& bindings) {
    const std::string& text = tpl.text;
    std::string out;
    out.reserve(text.size());

    for (std::size_t i = 0; i < text.size();) {
        if (text[i] != '{') {
            out.push_back(text[i++]);
            continue;
        }
        // Placeholder pattern: {lower_snake_case}. Anything else is literal,
        // so JSON examples inside templates survive rendering.
        std::size_t j = i + 1;
        while (j < text.size() && (std::islower(static_cast<unsigned char>(text[j])) ||
                                   std::isdigit(static_cast<unsigned char>(text[j])) ||
                                   text[j] == '_'))
            ++j;
        if (j > i + 1 && j < text.size() && text[j] == '}') {
            std::string name = text.substr(i + 1, j - i - 1);
            auto it = bindings.find(name);
            if (it == bindings.end())
                throw AdvisorError("template '" + tpl.id + "': unbound placeholder {" + name + "}");
            out += it->second;
            i = j + 1;
        } else {
            out.push_back(text[i++]);
        }
    }
    return out;
}

namespace prompts {

const PromptTemplate& state_selection() {
    static const PromptTemplate tpl{
        "state_selection",
        R"(Candidate states: {states}

I am designing a model-based testing framework for the {protocol}. To reduce the search space, I want to abstract the protocol into a small number of essential states that capture the most important aspects of its behavior for testing purposes.
Please help me identify {number} essential states above that cover the core functionality of {protocol} while preserving enough semantics to be useful for testing client and broker implementations.
Output Format: {example})"};
    return tpl;
}

const PromptTemplate& selection_format() {
    static const PromptTemplate tpl{
        "selection_format",
        R"(Return a JSON array of {number} objects.
Each object should have ONLY the following fields:
"select": A short name for the state (e.g., "CONNECT", "PUBLISH")
"reason": A concise explanation of why this state is essential for {protocol} testing)"};
    return tpl;
}

const PromptTemplate& autoprompt_instruction() {
    static const PromptTemplate tpl{
        "autoprompt_instruction",
        R"(You are helping to configure a random test-sequence generator for the {protocol} protocol.
Write a single reusable instruction that, given a list of protocol states, asks for a weighted random state-transition model of the protocol. The instruction must demand realistic state transition probabilities, genuine randomness, variable-length sequences, and that every sequence starts from the protocol's natural entry state.
Reply with the instruction text only.)"};
    return tpl;
}

const PromptTemplate& model_document() {
    static const PromptTemplate tpl{
        "model_document",
        R"({instruction}

States to model for {protocol}: {states}

Reply with one JSON object and nothing else, using exactly this schema:
"protocol": the protocol name
"candidate_states": the full state list you were given
"selected_states": the same states you are modeling
"initial_state": the entry state; every sequence starts here
"transitions": an object mapping each state to an array of [target, weight] pairs with positive integer weights
"stop_probability": the probability of ending the sequence after each appended state
"reconnect_rule": optional object with "state" and "reenter_probability" for a terminal state that may loop back to the initial state instead of stopping

Example shape: {"protocol": "X", "candidate_states": ["A", "B"], "selected_states": ["A", "B"], "initial_state": "A", "transitions": {"A": [["B", 70]], "B": [["A", 1]]}, "stop_probability": 0.5})"};
    return tpl;
}

const PromptTemplate& adjustment_decision() {
    static const PromptTemplate tpl{
        "adjustment_decision",
        R"({result_summary}
Above is the summary of fuzzing results of a {protocol} implementation using these states:
{states}
Do you think I should add or remove more states in the search space?
Give your result in JSON format.
It should ONLY have two fields:
"decision": ADD or DELETE answer for should I add more states in search space or delete one state in the search space?
"reason": A concise explanation of why I should add more states.)"};
    return tpl;
}

const PromptTemplate& adjustment_add_state() {
    static const PromptTemplate tpl{
        "adjustment_add_state",
        R"(You decided to add a state to the {protocol} search space.
Previously unselected candidate states: {candidates}
Pick exactly one state from that list.
Reply in JSON with ONLY one field:
"state": the chosen state name)"};
    return tpl;
}

const PromptTemplate& adjustment_delete_state() {
    static const PromptTemplate tpl{
        "adjustment_delete_state",
        R"(You decided to remove a state from the {protocol} search space.
{result_summary}
Currently selected states that may be removed: {candidates}
Pick the one underperforming state to remove, based on the summary above.
Reply in JSON with ONLY one field:
"state": the chosen state name)"};
    return tpl;
}

const PromptTemplate& candidate_augmentation() {
    static const PromptTemplate tpl{
        "candidate_augmentation",
        R"(Here is the initial state list for the {protocol} protocol: {states}
Based on typical client-server interactions and expected message sequences for {protocol}, list any additional protocol states worth testing.
Return a JSON array of state name strings. Return an empty array if nothing is missing.)"};
    return tpl;
}

} // namespace prompts

std::map<std::string, PromptTemplate> default_prompts() {
    std::map<std::string, PromptTemplate> out;
    for (const PromptTemplate* tpl :
         {&prompts::state_selection(), &prompts::selection_format(),
          &prompts::autoprompt_instruction(), &prompts::model_document(),
          &prompts::adjustment_decision(), &prompts::adjustment_add_state(),
          &prompts::adjustment_delete_state(), &prompts::candidate_augmentation()})
        out[tpl->id] = *tpl;
    return out;
}

std::map<std::string, PromptTemplate> load_prompts(const std::string& dir) {
    auto out = default_prompts();
    for (auto& [id, tpl] : out) {
        std::filesystem::path path = std::filesystem::path(dir) / (id + ".txt");
        std::ifstream in(path);
        if (!in) continue;
        std::ostringstream text;
        text << in.rdbuf();
        tpl.text = text.str();
    }
    return out;
}

void write_default_prompts(const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& [id, tpl] : default_prompts()) {
        std::ofstream out(std::filesystem::path(dir) / (id + ".txt"));
        if (!out) throw ConfigError("cannot write prompt file in " + dir);
        out << tpl.text;
    }
}

} // namespace mbfuzz
