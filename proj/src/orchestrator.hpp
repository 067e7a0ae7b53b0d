#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chat.hpp"
#include "prompts.hpp"
#include "runner.hpp"
#include "schemes.hpp"
#include "scoring.hpp"

namespace encls {

// Runs a materialized candidate against the verification instance.
using VerifyFn = std::function<RunResult(const CandidateSpec&)>;
// Scores a verified candidate on the training instances.
using EvaluateFn = std::function<EvalRecord(const CandidateSpec&)>;
// Observes every outgoing request before it is sent. Used by tests to check
// prompt hygiene and by the CLI for progress output.
using PromptCallback = std::function<void(const std::vector<ChatMessage>&)>;

struct GatheredCandidate {
  CandidateSpec spec;
  std::optional<EvalRecord> eval;
  int repair_rounds = 0;
};

struct GatherOptions {
  int max_repair_tries = 10;
  double temp_start = 0.7;
  double temp_end = 1.2;
  // Conversations longer than this many characters get their oldest accepted
  // program bodies collapsed to one-line summaries.
  size_t max_context_chars = 120000;
  PromptTemplates prompts = default_prompts();
  // Fired right after a candidate is accepted and scored, so callers can
  // persist progress before the next provider call.
  std::function<void(const GatheredCandidate&)> on_candidate;
};

struct GatherResult {
  std::vector<GatheredCandidate> candidates;
  int attempts = 0;
  int gave_up = 0;
  int provider_calls = 0;
};

// Asks the provider for `n` programs against the scheme's encoder source.
// Each reply is verified; failures go through the repair loop. Accepted
// programs are appended to the conversation so later requests do not repeat
// them. Temperature rises linearly from temp_start to temp_end over the run.
GatherResult gather(const EncodingScheme& scheme, int n, ChatProvider& provider,
                    const VerifyFn& verify, const EvaluateFn& evaluate,
                    const GatherOptions& opts = {},
                    const PromptCallback& on_prompt = nullptr);

struct RepairOutcome {
  std::optional<CandidateSpec> fixed;  // empty means the loop gave up
  int tries = 0;                       // provider calls spent
  std::string final_reply;             // last program text received
};

// Feeds the verification failure back to the provider until the candidate
// passes or max_tries replies have been burned. `conversation` must end with
// the assistant reply that produced `c`; repair exchanges extend a local copy
// and are not written back. Throws std::logic_error when `c` already passes
// (failure.status is Ok or SoftTimeoutOk).
RepairOutcome repair_loop(const CandidateSpec& c, const RunResult& failure,
                          ChatProvider& provider,
                          const std::vector<ChatMessage>& conversation,
                          double temperature, int max_tries,
                          const VerifyFn& verify, const PromptTemplates& prompts,
                          const PromptCallback& on_prompt = nullptr);

enum class VersionTag { Base, Refined, Structure };

const char* version_tag_name(VersionTag t);

struct VersionRecord {
  CandidateSpec spec;
  std::optional<EvalRecord> eval;  // empty when the version never verified
  Significance vs_last_accepted = Significance::NoChange;
  bool verified = false;
  bool accepted = false;
  VersionTag tag = VersionTag::Base;
};

struct RefineOptions {
  int max_repair_tries = 10;
  double temperature = 0.9;
  // First version number that gets the structure re-encouragement text.
  int structure_from_version = 12;
  PromptTemplates prompts = default_prompts();
  // Fired for the base and then for every finished round, so a chain
  // interrupted by a provider failure keeps its lineage on disk.
  std::function<void(const VersionRecord&)> on_version;
};

struct RefineChain {
  std::vector<VersionRecord> versions;  // versions[0] is the base
  int provider_calls = 0;
};

// Runs `iterations` refinement rounds on top of a verified, scored base.
// Round r produces version r+1. Each version is verified (repairing if
// needed), scored, and compared against the last accepted version; WORSE and
// unverified versions are recorded but the next prompt instructs a revert to
// the last accepted source.
RefineChain refine(const CandidateSpec& base, const EvalRecord& base_eval,
                   int iterations, ChatProvider& provider,
                   const EncodingScheme& scheme, const VerifyFn& verify,
                   const EvaluateFn& evaluate, const RefineOptions& opts = {},
                   const PromptCallback& on_prompt = nullptr);

struct ScoredCandidate {
  CandidateSpec spec;
  EvalRecord eval;
};

// Ranks each provider's candidates and keeps the best k clean ones (no
// runtime errors). Groups short on clean candidates contribute what they
// have and leave a note in `warnings`.
std::vector<CandidateSpec> select_top(
    const std::map<std::string, std::vector<ScoredCandidate>>& by_provider,
    int k, std::vector<std::string>* warnings = nullptr);

}  // namespace encls
