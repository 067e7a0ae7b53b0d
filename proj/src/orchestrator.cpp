#include "orchestrator.hpp"

#include <algorithm>
#include <stdexcept>

namespace encls {

namespace {

bool run_passed(const RunResult& r) {
  return r.status == RunStatus::Ok || r.status == RunStatus::SoftTimeoutOk;
}

std::string wrap_source(const std::string& code) {
  return "```python\n" + code + "\n```";
}

std::string send(ChatProvider& provider, const std::vector<ChatMessage>& conv,
                 double temperature, const PromptCallback& on_prompt,
                 int& calls) {
  if (on_prompt) on_prompt(conv);
  ++calls;
  return provider.complete(conv, temperature);
}

std::string describe_failure(const RunResult& r) {
  switch (r.status) {
    case RunStatus::HardTimeout:
      return "The program was killed because it ran past twice the time "
             "limit. It must watch the clock and print its best assignment, "
             "terminated by a single 0, before the limit passed on the "
             "command line elapses.";
    case RunStatus::RuntimeError: {
      std::string out = "The program exited with an error.";
      if (!r.message.empty()) out += "\nError: " + r.message;
      return out;
    }
    case RunStatus::InvalidOutput: {
      std::string out = "The program ran but did not print a valid assignment.";
      if (!r.message.empty()) out += " Problem: " + r.message;
      return out;
    }
    default:
      return r.message;
  }
}

std::string repair_line_note(const RunResult& r) {
  if (!r.error_line) return "";
  return "\nThe failure points at line " + std::to_string(*r.error_line) +
         " of your program.";
}

// Collapses the oldest accepted program bodies once the conversation grows
// past the budget, keeping the most recent exchange intact.
void trim_context(std::vector<ChatMessage>& conv, size_t budget) {
  auto total = [&conv] {
    size_t s = 0;
    for (const auto& m : conv) s += m.content.size();
    return s;
  };
  static const char* kElided =
      "```python\n# earlier program elided to keep the conversation short\n```";
  for (size_t i = 2; i + 2 < conv.size() && total() > budget; ++i) {
    if (conv[i].role != "assistant") continue;
    if (conv[i].content == kElided) continue;
    conv[i].content = kElided;
  }
}

}  // namespace

RepairOutcome repair_loop(const CandidateSpec& c, const RunResult& failure,
                          ChatProvider& provider,
                          const std::vector<ChatMessage>& conversation,
                          double temperature, int max_tries,
                          const VerifyFn& verify, const PromptTemplates& prompts,
                          const PromptCallback& on_prompt) {
  if (run_passed(failure)) {
    throw std::logic_error("repair_loop called with a passing candidate");
  }

  std::vector<ChatMessage> scratch = conversation;
  RunResult current = failure;
  RepairOutcome out;
  out.final_reply = c.source;

  for (int attempt = 1; attempt <= max_tries; ++attempt) {
    std::string msg = prompts.repair_user;
    msg = fill_placeholder(std::move(msg), "message", describe_failure(current));
    msg = fill_placeholder(std::move(msg), "line_note", repair_line_note(current));
    scratch.push_back({"user", msg});

    std::string reply = send(provider, scratch, temperature, on_prompt,
                             out.tries);
    scratch.push_back({"assistant", reply});

    CandidateSpec fixed = c;
    fixed.source = extract_code_block(reply);
    out.final_reply = fixed.source;

    current = verify(fixed);
    if (run_passed(current)) {
      out.fixed = std::move(fixed);
      return out;
    }
  }
  return out;
}

GatherResult gather(const EncodingScheme& scheme, int n, ChatProvider& provider,
                    const VerifyFn& verify, const EvaluateFn& evaluate,
                    const GatherOptions& opts, const PromptCallback& on_prompt) {
  if (n < 1) throw std::invalid_argument("gather: n must be at least 1");
  if (scheme.source_text.empty()) {
    throw std::invalid_argument("gather: scheme has no encoder source");
  }

  GatherResult result;
  std::vector<ChatMessage> conversation;
  conversation.push_back({"system", opts.prompts.gather_system});
  conversation.push_back(
      {"user", fill_placeholder(opts.prompts.gather_user, "source",
                                wrap_source(scheme.source_text))});

  for (int i = 1; i <= n; ++i) {
    ++result.attempts;
    double t = opts.temp_start;
    if (n > 1) {
      t += (opts.temp_end - opts.temp_start) * double(i - 1) / double(n - 1);
    }

    std::string reply =
        send(provider, conversation, t, on_prompt, result.provider_calls);

    CandidateSpec spec;
    spec.id = provider.name() + "-" + scheme.name + "-" + std::to_string(i);
    spec.source = extract_code_block(reply);
    spec.entry = "python3 {source}";
    spec.origin = CandidateOrigin::Base;
    spec.version = 1;

    int repair_rounds = 0;
    RunResult res = verify(spec);
    if (!run_passed(res)) {
      std::vector<ChatMessage> scratch = conversation;
      scratch.push_back({"assistant", reply});
      RepairOutcome fix =
          repair_loop(spec, res, provider, scratch, t, opts.max_repair_tries,
                      verify, opts.prompts, on_prompt);
      result.provider_calls += fix.tries;
      repair_rounds = fix.tries;
      if (!fix.fixed) {
        ++result.gave_up;
        continue;
      }
      spec = std::move(*fix.fixed);
    }

    GatheredCandidate gc;
    gc.spec = spec;
    gc.repair_rounds = repair_rounds;
    if (evaluate) gc.eval = evaluate(spec);
    if (opts.on_candidate) opts.on_candidate(gc);
    result.candidates.push_back(std::move(gc));

    conversation.push_back({"assistant", wrap_source(spec.source)});
    conversation.push_back({"user", opts.prompts.gather_followup});
    trim_context(conversation, opts.max_context_chars);
  }
  return result;
}

const char* version_tag_name(VersionTag t) {
  switch (t) {
    case VersionTag::Base: return "base";
    case VersionTag::Refined: return "refined";
    case VersionTag::Structure: return "structure";
  }
  return "base";
}

RefineChain refine(const CandidateSpec& base, const EvalRecord& base_eval,
                   int iterations, ChatProvider& provider,
                   const EncodingScheme& scheme, const VerifyFn& verify,
                   const EvaluateFn& evaluate, const RefineOptions& opts,
                   const PromptCallback& on_prompt) {
  if (base_eval.results.empty()) {
    throw std::invalid_argument("refine: base candidate has no training scores");
  }

  RefineChain chain;
  VersionRecord head;
  head.spec = base;
  head.spec.version = 1;
  head.eval = base_eval;
  head.verified = true;
  head.accepted = true;
  head.tag = VersionTag::Base;
  if (opts.on_version) opts.on_version(head);
  chain.versions.push_back(head);

  CandidateSpec last_accepted = chain.versions.front().spec;
  EvalRecord last_eval = base_eval;

  std::vector<ChatMessage> conversation;
  conversation.push_back({"system", opts.prompts.refine_system});
  {
    std::string first = opts.prompts.refine_user;
    first = fill_placeholder(std::move(first), "source",
                             wrap_source(scheme.source_text));
    first = fill_placeholder(std::move(first), "candidate",
                             wrap_source(base.source));
    conversation.push_back({"user", first});
  }

  Significance prev = Significance::Better;
  for (int round = 1; round <= iterations; ++round) {
    const int version = round + 1;
    const VersionTag tag = version >= opts.structure_from_version
                               ? VersionTag::Structure
                               : VersionTag::Refined;

    if (round == 1) {
      if (tag == VersionTag::Structure) {
        conversation.back().content += opts.prompts.structure_reencourage;
      }
    } else {
      std::string feedback;
      switch (prev) {
        case Significance::Better:
          feedback = opts.prompts.feedback_better;
          break;
        case Significance::Worse:
          feedback = fill_placeholder(opts.prompts.feedback_worse,
                                      "parent_source", last_accepted.source);
          break;
        case Significance::NoChange:
          feedback = opts.prompts.feedback_no_change;
          break;
      }
      std::string msg =
          fill_placeholder(opts.prompts.refine_followup, "feedback", feedback);
      if (tag == VersionTag::Structure) {
        msg += opts.prompts.structure_reencourage;
      }
      conversation.push_back({"user", msg});
    }

    std::string reply = send(provider, conversation, opts.temperature,
                             on_prompt, chain.provider_calls);

    VersionRecord rec;
    rec.tag = tag;
    rec.spec.id = base.id + "-v" + std::to_string(version);
    rec.spec.source = extract_code_block(reply);
    rec.spec.entry = base.entry;
    rec.spec.origin = CandidateOrigin::Refined;
    rec.spec.version = version;
    rec.spec.lineage = last_accepted.id;

    std::string context_source = rec.spec.source;
    RunResult res = verify(rec.spec);
    if (!run_passed(res)) {
      std::vector<ChatMessage> scratch = conversation;
      scratch.push_back({"assistant", reply});
      RepairOutcome fix =
          repair_loop(rec.spec, res, provider, scratch, opts.temperature,
                      opts.max_repair_tries, verify, opts.prompts, on_prompt);
      chain.provider_calls += fix.tries;
      if (fix.fixed) {
        rec.spec = std::move(*fix.fixed);
        rec.verified = true;
        context_source = rec.spec.source;
      } else {
        rec.verified = false;
        context_source = fix.final_reply;
      }
    } else {
      rec.verified = true;
    }

    conversation.push_back({"assistant", wrap_source(context_source)});

    if (rec.verified) {
      rec.eval = evaluate(rec.spec);
      rec.vs_last_accepted = compare_eval(last_eval, *rec.eval);
      rec.accepted = rec.vs_last_accepted != Significance::Worse;
      if (rec.accepted) {
        last_accepted = rec.spec;
        last_eval = *rec.eval;
      }
      prev = rec.vs_last_accepted;
    } else {
      rec.vs_last_accepted = Significance::Worse;
      rec.accepted = false;
      prev = Significance::Worse;
    }
    if (opts.on_version) opts.on_version(rec);
    chain.versions.push_back(std::move(rec));
  }
  return chain;
}

std::vector<CandidateSpec> select_top(
    const std::map<std::string, std::vector<ScoredCandidate>>& by_provider,
    int k, std::vector<std::string>* warnings) {
  std::vector<CandidateSpec> picked;
  for (const auto& [provider_name, group] : by_provider) {
    std::vector<EvalRecord> evals;
    evals.reserve(group.size());
    for (const auto& sc : group) evals.push_back(sc.eval);

    std::vector<EvalRecord> ranked = rank(evals);
    int taken = 0;
    for (const auto& rec : ranked) {
      if (taken == k) break;
      if (rec.had_runtime_error()) continue;
      auto it = std::find_if(group.begin(), group.end(),
                             [&rec](const ScoredCandidate& sc) {
                               return sc.spec.id == rec.candidate_id;
                             });
      if (it == group.end()) continue;
      picked.push_back(it->spec);
      ++taken;
    }
    if (taken < k && warnings) {
      warnings->push_back(provider_name + ": only " + std::to_string(taken) +
                          " clean candidates of " + std::to_string(k) +
                          " requested");
    }
  }
  return picked;
}

}  // namespace encls
