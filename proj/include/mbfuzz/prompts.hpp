// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

namespace mbfuzz {

// Text with {name} placeholders. Rendering binds every placeholder or fails;
// braces not matching the placeholder pattern (JSON examples and the like)
// pass through untouched.
struct PromptTemplate {
    std::string id;
    std::string text;
};

std::string render(const PromptTemplate& tpl,
                   const std::map<std::string, std::string>& bindings); // throws AdvisorError

// Shipped defaults, overridable per campaign from a prompts directory.
namespace prompts {
const PromptTemplate& state_selection();
const PromptTemplate& selection_format();
const PromptTemplate& autoprompt_instruction();
const PromptTemplate& model_document();
const PromptTemplate& adjustment_decision();
const PromptTemplate& adjustment_add_state();
const PromptTemplate& adjustment_delete_state();
const PromptTemplate& candidate_augmentation();
} // namespace prompts

// All defaults keyed by id.
std::map<std::string, PromptTemplate> default_prompts();

// Reads <dir>/<id>.txt for every default id that has a file, falling back to
// the shipped text otherwise.
std::map<std::string, PromptTemplate> load_prompts(const std::string& dir);

// Writes the shipped defaults as <dir>/<id>.txt.
void write_default_prompts(const std::string& dir);

} // namespace mbfuzz
