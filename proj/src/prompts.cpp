#include "prompts.hpp"

#include <cstdio>

namespace encls {

namespace {

const char* kGatherSystem =
    "You write small, correct, dependency-free Python 3 programs. "
    "Reply with exactly one Python code block and nothing else: no prose "
    "before or after the block.";

const char* kGatherUser = R"(Below is the source of a program that turns an input instance into a CNF formula in DIMACS format, together with a JSON file that maps variable families and index tuples to DIMACS variable numbers.

{source}

Write a standalone Python 3 program that is started as

    python3 prog.py <instance-file> <cnf-file> <varmap-file> <timeout-seconds>

The CNF file is standard DIMACS ("p cnf <vars> <clauses>" header, clauses as zero-terminated lines). The varmap file is JSON of the form {"families": {"<name>": [[[i, j, ...], var], ...]}, "meta": {...}}; each entry maps an index tuple to a positive DIMACS variable number.

Your program must run a local search over assignments to the CNF variables and try to satisfy as many clauses as it can within the time limit. Requirements:

- Read the instance, CNF and varmap files; use whichever of them helps.
- Keep its own clock and stop before <timeout-seconds> elapse, printing the best assignment found so far even when it is not a full solution.
- Print the assignment to stdout as whitespace-separated signed integers (v for true, -v for false), terminated by a single 0. Nothing else may precede the terminator.
- Use only the Python standard library.
- Exploit the structure visible in the encoder source and the varmap families rather than treating the formula as an opaque clause list.
- Be inventive: prefer an approach you have not produced for this task before.)";

const char* kGatherFollowup =
    "Good. Now write another standalone program for the same contract, but "
    "make it meaningfully different from every program you produced so far "
    "in this conversation: a different search strategy, a different way of "
    "using the varmap families, or a different neighbourhood. Reply with "
    "exactly one Python code block.";

const char* kRepairUser = R"(Your program failed when run against a small instance.

{message}{line_note}

Fix the problem and reply with the complete corrected program as a single Python code block. Keep the same command-line contract and output format.)";

const char* kRefineSystem =
    "You improve small, correct, dependency-free Python 3 programs. "
    "Reply with exactly one Python code block containing the full revised "
    "program and nothing else.";

const char* kRefineUser = R"(Below is the source of a program that turns an input instance into a CNF formula in DIMACS format, together with a JSON varmap that maps variable families and index tuples to DIMACS variable numbers.

{source}

And here is a working program that is started as

    python3 prog.py <instance-file> <cnf-file> <varmap-file> <timeout-seconds>

and prints a whitespace-separated signed-literal assignment terminated by a single 0, trying to satisfy as many CNF clauses as possible before the timeout:

{candidate}

Revise the program to find better assignments faster. Keep the command-line contract and output format exactly as they are. Reply with the complete revised program as a single Python code block.)";

const char* kRefineFollowup = R"({feedback}

Reply with the complete next revision as a single Python code block. Keep the command-line contract and output format unchanged.)";

const char* kFeedbackBetter =
    "The last revision measured faster on the benchmark. Continue with "
    "similar refinements.";

const char* kFeedbackWorse = R"(The last revision measured worse on the benchmark, so it was discarded. Start again from the version below, which remains the best so far, and take a different direction with it.

```python
{parent_source}
```)";

const char* kFeedbackNoChange =
    "The last revision made no measurable difference on the benchmark. It "
    "was kept, but perform a bigger change this time: restructure the "
    "search rather than tuning constants.";

const char* kStructureReencourage =
    " In this revision, make deliberate use of the problem structure: read "
    "the original instance file and the varmap families, and move in the "
    "space of instance-level decisions instead of flipping CNF variables "
    "one at a time.";

}  // namespace

const PromptTemplates& default_prompts() {
  static const PromptTemplates t = {
      kGatherSystem,     kGatherUser,     kGatherFollowup,      kRepairUser,
      kRefineSystem,     kRefineUser,     kRefineFollowup,      kFeedbackBetter,
      kFeedbackWorse,    kFeedbackNoChange, kStructureReencourage,
  };
  return t;
}

std::string fill_placeholder(std::string text, const std::string& key,
                             const std::string& value) {
  const std::string needle = "{" + key + "}";
  size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return text;
}

std::string extract_code_block(const std::string& reply) {
  auto trim = [](std::string s) {
    const char* ws = " \t\r\n";
    size_t b = s.find_first_not_of(ws);
    if (b == std::string::npos) return std::string();
    size_t e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };

  size_t open = reply.find("```");
  if (open == std::string::npos) return trim(reply);
  size_t body = reply.find('\n', open);
  if (body == std::string::npos) return trim(reply);
  ++body;
  size_t close = reply.find("```", body);
  if (close == std::string::npos) return trim(reply.substr(body));
  return trim(reply.substr(body, close - body));
}

uint64_t fnv1a(std::string_view data) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string prompt_set_hash(const PromptTemplates& t) {
  std::string all;
  for (const std::string* part :
       {&t.gather_system, &t.gather_user, &t.gather_followup, &t.repair_user,
        &t.refine_system, &t.refine_user, &t.refine_followup,
        &t.feedback_better, &t.feedback_worse, &t.feedback_no_change,
        &t.structure_reencourage}) {
    all += *part;
    all += '\x1f';
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(all)));
  return std::string(buf);
}

}  // namespace encls
