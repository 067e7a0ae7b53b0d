#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace encls {

// The fixed prompt texts the orchestrator assembles. They describe only the
// encoder source and the candidate contract; none of them may name the
// underlying problem (tests scan them against every scheme's deny list).
struct PromptTemplates {
  std::string gather_system;
  std::string gather_user;      // {source} placeholder
  std::string gather_followup;  // asks for the next, different approach
  std::string repair_user;      // {message} and {line_note} placeholders
  std::string refine_system;
  std::string refine_user;      // {source} and {candidate} placeholders
  std::string refine_followup;  // {feedback} placeholder
  std::string feedback_better;
  std::string feedback_worse;   // {parent_source} placeholder
  std::string feedback_no_change;
  std::string structure_reencourage;
};

const PromptTemplates& default_prompts();

// Replaces every occurrence of {key} in the template.
std::string fill_placeholder(std::string text, const std::string& key,
                             const std::string& value);

// Pulls the program out of a chat reply: the first fenced code block, or the
// whole reply when there is no fence.
std::string extract_code_block(const std::string& reply);

uint64_t fnv1a(std::string_view data);

// Combined hash of every template, pinned into run manifests so prompt
// changes are visible across runs.
std::string prompt_set_hash(const PromptTemplates& t);

}  // namespace encls
