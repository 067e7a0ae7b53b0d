#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include <json.hpp>

#include "orchestrator.hpp"

using namespace encls;
namespace fs = std::filesystem;

namespace {

// Scripted provider that also records every request it received.
class FakeProvider final : public ChatProvider {
 public:
  struct Call {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
  };

  explicit FakeProvider(std::vector<std::string> replies,
                        std::string label = "fake")
      : replies_(std::move(replies)), label_(std::move(label)) {}

  std::string name() const override { return label_; }

  std::string complete(const std::vector<ChatMessage>& messages,
                       double temperature) override {
    calls.push_back({messages, temperature});
    if (index_ >= replies_.size())
      throw ProviderError("fake provider exhausted after " +
                          std::to_string(index_) + " calls");
    return replies_[index_++];
  }

  std::vector<Call> calls;

 private:
  std::vector<std::string> replies_;
  size_t index_ = 0;
  std::string label_;
};

EncodingScheme toy_scheme() {
  EncodingScheme s;
  s.name = "toy";
  s.instance_kind = "graph";
  s.bound_name = "k";
  s.source_text = "def encode(instance, bound):\n    return cnf, mapping\n";
  s.deny_terms = {"forbidden-word"};
  return s;
}

std::string program(const std::string& marker) {
  return "```python\n# " + marker + "\nprint('0')\n```";
}

RunResult ok_result() {
  RunResult r;
  r.status = RunStatus::Ok;
  r.assignment = Assignment(2);
  return r;
}

// Sources containing BROKEN fail verification with a canned error.
RunResult source_verify(const CandidateSpec& c) {
  if (c.source.find("BROKEN") != std::string::npos) {
    RunResult r;
    r.status = RunStatus::RuntimeError;
    r.message = "name 'foo' is not defined";
    r.error_line = 12;
    return r;
  }
  return ok_result();
}

// Sources may carry a TIME=<seconds> marker steering their benchmark score.
EvalRecord marker_eval(const CandidateSpec& c) {
  double seconds = 50.0;
  if (auto pos = c.source.find("TIME="); pos != std::string::npos)
    seconds = std::stod(c.source.substr(pos + 5));
  InstanceResult r;
  r.instance = "train-1";
  r.ls_status = RunStatus::Ok;
  r.ls_seconds = 0.1;
  r.sat_status = SolveStatus::Sat;
  r.sat_seconds = seconds;
  return EvalRecord{c.id, {r}};
}

std::string last_user_content(const std::vector<ChatMessage>& messages) {
  for (auto it = messages.rbegin(); it != messages.rend(); ++it)
    if (it->role == "user") return it->content;
  return {};
}

bool alternates_after_system(const std::vector<ChatMessage>& messages) {
  if (messages.empty() || messages[0].role != "system") return false;
  for (size_t i = 1; i < messages.size(); ++i) {
    const std::string& want = (i % 2 == 1) ? "user" : "assistant";
    if (messages[i].role != want) return false;
  }
  return true;
}

CandidateSpec base_spec(const std::string& marker) {
  CandidateSpec c;
  c.id = "fake-toy-1";
  c.source = "# " + marker + "\nprint('0')\n";
  c.entry = "python3 {source}";
  c.origin = CandidateOrigin::Base;
  c.version = 1;
  return c;
}

ScoredCandidate scored(const std::string& id, double seconds, bool broken = false) {
  CandidateSpec spec;
  spec.id = id;
  spec.source = "print('0')\n";
  spec.entry = "python3 {source}";
  InstanceResult r;
  r.instance = "i";
  if (broken) {
    r.ls_status = RunStatus::RuntimeError;
    r.ls_message = "boom";
  } else {
    r.ls_status = RunStatus::Ok;
    r.sat_status = SolveStatus::Sat;
    r.sat_seconds = seconds;
  }
  return {spec, EvalRecord{id, {r}}};
}

}  // namespace

TEST_CASE("gather accepts scripted programs without repairs") {
  FakeProvider p({program("one"), program("two"), program("three")});
  GatherResult res = gather(toy_scheme(), 3, p, source_verify, marker_eval);
  REQUIRE(res.candidates.size() == 3);
  CHECK(res.attempts == 3);
  CHECK(res.gave_up == 0);
  CHECK(res.provider_calls == 3);
  for (int i = 0; i < 3; ++i) {
    const GatheredCandidate& c = res.candidates[i];
    CHECK(c.repair_rounds == 0);
    CHECK(c.spec.id == "fake-toy-" + std::to_string(i + 1));
    CHECK(c.spec.version == 1);
    CHECK(c.spec.origin == CandidateOrigin::Base);
    CHECK(c.spec.entry == "python3 {source}");
    REQUIRE(c.eval.has_value());
    CHECK(c.eval->candidate_id == c.spec.id);
  }
  CHECK(res.candidates[0].spec.source.find("# one") != std::string::npos);
}

TEST_CASE("gather shows the encoder source and accumulates accepted programs") {
  FakeProvider p({program("one"), program("two")});
  EncodingScheme scheme = toy_scheme();
  GatherResult res = gather(scheme, 2, p, source_verify, marker_eval);
  REQUIRE(res.candidates.size() == 2);
  REQUIRE(p.calls.size() == 2);

  const auto& first = p.calls[0].messages;
  REQUIRE(first.size() == 2);
  CHECK(first[0].role == "system");
  CHECK(first[1].role == "user");
  CHECK(first[1].content.find(scheme.source_text) != std::string::npos);

  const auto& second = p.calls[1].messages;
  REQUIRE(second.size() == 4);
  CHECK(alternates_after_system(second));
  CHECK(second[2].role == "assistant");
  CHECK(second[2].content.find("# one") != std::string::npos);
  CHECK(second[3].content.find("meaningfully different") != std::string::npos);
}

TEST_CASE("gather temperature rises linearly across the run") {
  FakeProvider p({program("a"), program("b"), program("c")});
  GatherResult res = gather(toy_scheme(), 3, p, source_verify, marker_eval);
  REQUIRE(res.candidates.size() == 3);
  CHECK(p.calls[0].temperature == doctest::Approx(0.7));
  CHECK(p.calls[1].temperature == doctest::Approx(0.95));
  CHECK(p.calls[2].temperature == doctest::Approx(1.2));

  FakeProvider lone({program("a")});
  gather(toy_scheme(), 1, lone, source_verify, marker_eval);
  CHECK(lone.calls[0].temperature == doctest::Approx(0.7));
}

TEST_CASE("gather repairs a broken program and reports the error line") {
  FakeProvider p({program("BROKEN first"), program("fixed")});
  GatherResult res = gather(toy_scheme(), 1, p, source_verify, marker_eval);
  REQUIRE(res.candidates.size() == 1);
  CHECK(res.candidates[0].repair_rounds == 1);
  CHECK(res.candidates[0].spec.source.find("fixed") != std::string::npos);
  CHECK(res.provider_calls == 2);

  REQUIRE(p.calls.size() == 2);
  std::string repair_prompt = last_user_content(p.calls[1].messages);
  CHECK(repair_prompt.find("name 'foo' is not defined") != std::string::npos);
  CHECK(repair_prompt.find("line 12") != std::string::npos);
}

TEST_CASE("gather aborts when the provider keeps failing") {
  FakeProvider p({});
  CHECK_THROWS_AS(gather(toy_scheme(), 1, p, source_verify, marker_eval),
                  ProviderError);
}

TEST_CASE("gather rejects bad arguments") {
  FakeProvider p({});
  CHECK_THROWS_AS(gather(toy_scheme(), 0, p, source_verify, marker_eval),
                  std::invalid_argument);
  EncodingScheme empty = toy_scheme();
  empty.source_text.clear();
  CHECK_THROWS_AS(gather(empty, 1, p, source_verify, marker_eval),
                  std::invalid_argument);
}

TEST_CASE("gather skips a candidate it cannot repair and moves on") {
  FakeProvider p({program("BROKEN a"), program("BROKEN b"), program("good")});
  GatherOptions opts;
  opts.max_repair_tries = 1;
  GatherResult res = gather(toy_scheme(), 2, p, source_verify, marker_eval, opts);
  CHECK(res.candidates.size() == 1);
  CHECK(res.gave_up == 1);
  CHECK(res.attempts == 2);
  CHECK(res.provider_calls == 3);
  CHECK(res.provider_calls <= 2 * (1 + opts.max_repair_tries));
  // the failed attempt leaves no trace in the next request
  CHECK(p.calls[2].messages == p.calls[0].messages);
}

TEST_CASE("gather trims old program bodies once the context grows") {
  GatherOptions opts;
  opts.max_context_chars = 300;
  FakeProvider p({program("first with a reasonably long body marker"),
                  program("second with a reasonably long body marker"),
                  program("third")});
  GatherResult res = gather(toy_scheme(), 3, p, source_verify, marker_eval, opts);
  REQUIRE(res.candidates.size() == 3);
  const auto& last = p.calls[2].messages;
  CHECK(last[2].content.find("elided") != std::string::npos);
  CHECK(alternates_after_system(last));
  // trimming never rewrites what was already accepted
  CHECK(res.candidates[0].spec.source.find("first") != std::string::npos);
}

TEST_CASE("repair_loop returns the first passing fix") {
  FakeProvider p({program("BROKEN again"), program("fixed now")});
  CandidateSpec broken = base_spec("BROKEN start");
  std::vector<ChatMessage> conversation{
      {"system", "s"}, {"user", "u"}, {"assistant", program("BROKEN start")}};
  RepairOutcome out =
      repair_loop(broken, source_verify(broken), p, conversation, 0.9, 10,
                  source_verify, default_prompts());
  REQUIRE(out.fixed.has_value());
  CHECK(out.tries == 2);
  CHECK(out.fixed->id == broken.id);
  CHECK(out.fixed->source.find("fixed now") != std::string::npos);
  // the caller's conversation is not extended by repair traffic
  CHECK(conversation.size() == 3);
}

TEST_CASE("repair_loop gives up after max_tries") {
  std::vector<std::string> replies(10, program("BROKEN forever"));
  FakeProvider p(replies);
  CandidateSpec broken = base_spec("BROKEN start");
  std::vector<ChatMessage> conversation{
      {"system", "s"}, {"user", "u"}, {"assistant", program("BROKEN start")}};
  RepairOutcome out =
      repair_loop(broken, source_verify(broken), p, conversation, 0.9, 10,
                  source_verify, default_prompts());
  CHECK_FALSE(out.fixed.has_value());
  CHECK(out.tries == 10);
  CHECK(out.final_reply.find("BROKEN forever") != std::string::npos);
}

TEST_CASE("repair_loop refuses a passing candidate") {
  FakeProvider p({});
  CandidateSpec fine = base_spec("fine");
  std::vector<ChatMessage> conversation{{"system", "s"}, {"user", "u"}};
  CHECK_THROWS_AS(repair_loop(fine, ok_result(), p, conversation, 0.9, 10,
                              source_verify, default_prompts()),
                  std::logic_error);
}

TEST_CASE("refine accepts monotone improvements with continue feedback") {
  FakeProvider p({program("v2 TIME=85"), program("v3 TIME=70"),
                  program("v4 TIME=55")});
  CandidateSpec base = base_spec("base TIME=100");
  RefineChain chain = refine(base, marker_eval(base), 3, p, toy_scheme(),
                             source_verify, marker_eval);
  REQUIRE(chain.versions.size() == 4);
  CHECK(chain.provider_calls == 3);

  CHECK(chain.versions[0].tag == VersionTag::Base);
  CHECK(chain.versions[0].accepted);
  CHECK(chain.versions[0].spec.version == 1);

  for (int v = 1; v <= 3; ++v) {
    const VersionRecord& rec = chain.versions[v];
    CHECK(rec.spec.version == v + 1);
    CHECK(rec.spec.id == "fake-toy-1-v" + std::to_string(v + 1));
    CHECK(rec.tag == VersionTag::Refined);
    CHECK(rec.verified);
    CHECK(rec.accepted);
    CHECK(rec.vs_last_accepted == Significance::Better);
    REQUIRE(rec.eval.has_value());
  }
  CHECK(chain.versions[1].spec.lineage == "fake-toy-1");
  CHECK(chain.versions[2].spec.lineage == "fake-toy-1-v2");

  // rounds after an improvement ask to continue in the same direction
  std::string second_round = last_user_content(p.calls[1].messages);
  CHECK(second_round.find("Continue with similar refinements") != std::string::npos);
}

TEST_CASE("refine records worse versions and instructs a revert") {
  FakeProvider p({program("v2 TIME=85"), program("v3 TIME=200"),
                  program("v4 TIME=70")});
  CandidateSpec base = base_spec("base TIME=100");
  RefineChain chain = refine(base, marker_eval(base), 3, p, toy_scheme(),
                             source_verify, marker_eval);
  REQUIRE(chain.versions.size() == 4);

  const VersionRecord& worse = chain.versions[2];
  CHECK(worse.vs_last_accepted == Significance::Worse);
  CHECK_FALSE(worse.accepted);
  CHECK(worse.verified);

  std::string fourth_prompt = last_user_content(p.calls[2].messages);
  CHECK(fourth_prompt.find("Start again from the version below") != std::string::npos);
  CHECK(fourth_prompt.find("v2 TIME=85") != std::string::npos);

  // the worse version is not the lineage parent of the next one
  CHECK(chain.versions[3].spec.lineage == chain.versions[1].spec.id);
  CHECK(chain.versions[3].accepted);
}

TEST_CASE("refine keeps no-change versions but asks for a bigger change") {
  FakeProvider p({program("v2 TIME=98"), program("v3 TIME=95")});
  CandidateSpec base = base_spec("base TIME=100");
  RefineChain chain = refine(base, marker_eval(base), 2, p, toy_scheme(),
                             source_verify, marker_eval);
  REQUIRE(chain.versions.size() == 3);
  CHECK(chain.versions[1].vs_last_accepted == Significance::NoChange);
  CHECK(chain.versions[1].accepted);
  CHECK(chain.versions[2].spec.lineage == chain.versions[1].spec.id);

  std::string third_prompt = last_user_content(p.calls[1].messages);
  CHECK(third_prompt.find("perform a bigger change") != std::string::npos);
}

TEST_CASE("refine injects the structure text from the configured version") {
  FakeProvider p({program("v2 TIME=85"), program("v3 TIME=70"),
                  program("v4 TIME=55")});
  RefineOptions opts;
  opts.structure_from_version = 3;
  CandidateSpec base = base_spec("base TIME=100");
  RefineChain chain = refine(base, marker_eval(base), 3, p, toy_scheme(),
                             source_verify, marker_eval, opts);
  REQUIRE(chain.versions.size() == 4);
  CHECK(chain.versions[1].tag == VersionTag::Refined);
  CHECK(chain.versions[2].tag == VersionTag::Structure);
  CHECK(chain.versions[3].tag == VersionTag::Structure);

  const std::string structure_text = "deliberate use of the problem structure";
  CHECK(last_user_content(p.calls[0].messages).find(structure_text) ==
        std::string::npos);
  CHECK(last_user_content(p.calls[1].messages).find(structure_text) !=
        std::string::npos);
  CHECK(last_user_content(p.calls[2].messages).find(structure_text) !=
        std::string::npos);
}

TEST_CASE("refine with zero iterations returns just the base") {
  FakeProvider p({});
  CandidateSpec base = base_spec("base TIME=100");
  RefineChain chain = refine(base, marker_eval(base), 0, p, toy_scheme(),
                             source_verify, marker_eval);
  REQUIRE(chain.versions.size() == 1);
  CHECK(chain.versions[0].spec.id == base.id);
  CHECK(chain.provider_calls == 0);
}

TEST_CASE("refine records an unrepairable version as unverified") {
  FakeProvider p({program("BROKEN v2"), program("v3 TIME=80")});
  RefineOptions opts;
  opts.max_repair_tries = 0;
  CandidateSpec base = base_spec("base TIME=100");
  RefineChain chain = refine(base, marker_eval(base), 2, p, toy_scheme(),
                             source_verify, marker_eval, opts);
  REQUIRE(chain.versions.size() == 3);
  CHECK_FALSE(chain.versions[1].verified);
  CHECK_FALSE(chain.versions[1].accepted);
  CHECK_FALSE(chain.versions[1].eval.has_value());
  CHECK(chain.versions[2].accepted);
  CHECK(chain.versions[2].spec.lineage == base.id);
}

TEST_CASE("refine requires a scored base") {
  FakeProvider p({});
  CandidateSpec base = base_spec("base");
  CHECK_THROWS_AS(refine(base, EvalRecord{}, 1, p, toy_scheme(), source_verify,
                         marker_eval),
                  std::invalid_argument);
}

TEST_CASE("refine fires the version callback as the chain grows") {
  FakeProvider p({program("v2 TIME=85")});
  RefineOptions opts;
  std::vector<std::string> seen;
  opts.on_version = [&](const VersionRecord& rec) { seen.push_back(rec.spec.id); };
  CandidateSpec base = base_spec("base TIME=100");
  refine(base, marker_eval(base), 1, p, toy_scheme(), source_verify,
         marker_eval, opts);
  CHECK(seen == std::vector<std::string>{"fake-toy-1", "fake-toy-1-v2"});
}

TEST_CASE("prompt hygiene holds for the shipped schemes") {
  for (const std::string& name : scheme_names()) {
    const EncodingScheme& scheme = get_scheme(name);
    std::vector<std::string> offenses;
    PromptCallback scan = [&](const std::vector<ChatMessage>& messages) {
      for (const auto& m : messages)
        for (const auto& term : scan_deny_terms(scheme, m.content))
          offenses.push_back(name + ": " + term);
    };

    FakeProvider gp({program("one TIME=90"), program("two TIME=80")});
    GatherResult res =
        gather(scheme, 2, gp, source_verify, marker_eval, {}, scan);
    REQUIRE(res.candidates.size() == 2);

    FakeProvider rp({program("v2 TIME=70"), program("v3 TIME=300")});
    refine(res.candidates[0].spec, *res.candidates[0].eval, 2, rp, scheme,
           source_verify, marker_eval, {}, scan);

    CHECK(offenses.empty());
  }
}

TEST_CASE("select_top keeps the best k per provider") {
  std::map<std::string, std::vector<ScoredCandidate>> by_provider;
  for (int i = 1; i <= 7; ++i)
    by_provider["alpha"].push_back(
        scored("a" + std::to_string(i), 10.0 * i));
  std::vector<std::string> warnings;
  auto picked = select_top(by_provider, 5, &warnings);
  REQUIRE(picked.size() == 5);
  CHECK(picked[0].id == "a1");
  CHECK(picked[4].id == "a5");
  CHECK(warnings.empty());
}

TEST_CASE("select_top drops errored candidates and warns when short") {
  std::map<std::string, std::vector<ScoredCandidate>> by_provider;
  by_provider["alpha"] = {scored("c1", 10), scored("c2", 20), scored("c3", 30),
                          scored("b1", 1, true), scored("b2", 1, true),
                          scored("b3", 1, true), scored("b4", 1, true)};
  std::vector<std::string> warnings;
  auto picked = select_top(by_provider, 5, &warnings);
  REQUIRE(picked.size() == 3);
  CHECK(picked[0].id == "c1");
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("alpha") != std::string::npos);
  CHECK(warnings[0].find("3") != std::string::npos);
}

TEST_CASE("select_top takes k from every provider") {
  std::map<std::string, std::vector<ScoredCandidate>> by_provider;
  for (int i = 1; i <= 7; ++i) {
    by_provider["alpha"].push_back(scored("a" + std::to_string(i), 10.0 * i));
    by_provider["beta"].push_back(scored("b" + std::to_string(i), 10.0 * i));
  }
  auto picked = select_top(by_provider, 5);
  CHECK(picked.size() == 10);
}

TEST_CASE("extract_code_block prefers the first fence") {
  CHECK(extract_code_block("```python\nprint(1)\n```") == "print(1)");
  CHECK(extract_code_block("prose\n```\nraw\n```\ntail\n```python\nother\n```") ==
        "raw");
  CHECK(extract_code_block("no fence here") == "no fence here");
  CHECK(extract_code_block("```python\nunclosed\nrest") == "unclosed\nrest");
  CHECK(extract_code_block("   padded   ") == "padded");
}

TEST_CASE("fill_placeholder replaces every occurrence") {
  CHECK(fill_placeholder("{x} and {x}", "x", "y") == "y and y");
  CHECK(fill_placeholder("none", "x", "y") == "none");
  CHECK(fill_placeholder("{message}", "message", "{message} kept") ==
        "{message} kept");
}

TEST_CASE("prompt hash is stable and sensitive") {
  std::string h1 = prompt_set_hash(default_prompts());
  std::string h2 = prompt_set_hash(default_prompts());
  CHECK(h1 == h2);
  CHECK(h1.size() == 16);
  PromptTemplates tweaked = default_prompts();
  tweaked.feedback_better += "!";
  CHECK(prompt_set_hash(tweaked) != h1);
}

TEST_CASE("transcripts record and replay provider traffic") {
  char tmpl[] = "/tmp/encls-cassette-XXXXXX";
  int fd = mkstemp(tmpl);
  REQUIRE(fd >= 0);
  close(fd);
  std::string path = tmpl;

  std::vector<ChatMessage> request{{"system", "s"}, {"user", "hello"}};
  {
    ProviderConfig cfg;
    cfg.name = "scripted";
    cfg.kind = "scripted";
    cfg.scripted_responses = {"first reply", "second reply"};
    auto recorder = Transcript::record(make_scripted_provider(cfg), path);
    CHECK(recorder->complete(request, 0.7) == "first reply");
    CHECK(recorder->complete(request, 0.8) == "second reply");
    CHECK(recorder->calls_made() == 2);
  }

  // the cassette is line-delimited json with one indexed entry per call
  {
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
      auto j = nlohmann::json::parse(line);
      CHECK(j["index"] == lines);
      CHECK(j.contains("provider"));
      CHECK(j.contains("temperature"));
      CHECK(j.contains("request"));
      CHECK(j.contains("response"));
      lines++;
    }
    CHECK(lines == 2);
  }

  {
    auto replayer = Transcript::replay(path, "scripted");
    CHECK(replayer->complete(request, 0.7) == "first reply");
    CHECK(replayer->complete(request, 0.8) == "second reply");
    CHECK_THROWS_AS(replayer->complete(request, 0.9), TranscriptMismatch);
  }

  {
    auto replayer = Transcript::replay(path, "scripted");
    std::vector<ChatMessage> other{{"system", "s"}, {"user", "different"}};
    CHECK_THROWS_AS(replayer->complete(other, 0.7), TranscriptMismatch);
  }

  {
    auto replayer = Transcript::replay(path, "scripted");
    CHECK_THROWS_AS(replayer->complete(request, 0.65), TranscriptMismatch);
  }

  fs::remove(path);
}

TEST_CASE("scripted providers error once exhausted") {
  ProviderConfig cfg;
  cfg.name = "scripted";
  cfg.kind = "scripted";
  cfg.scripted_responses = {"only"};
  auto provider = make_provider(cfg);
  CHECK(provider->name() == "scripted");
  std::vector<ChatMessage> request{{"user", "hi"}};
  CHECK(provider->complete(request, 0.5) == "only");
  CHECK_THROWS_AS(provider->complete(request, 0.5), ProviderError);
}

TEST_CASE("deny term scan is case-insensitive") {
  EncodingScheme s = toy_scheme();
  s.deny_terms = {"Secret Phrase"};
  CHECK(scan_deny_terms(s, "keep the SECRET phrase out") ==
        std::vector<std::string>{"Secret Phrase"});
  CHECK(scan_deny_terms(s, "nothing to see").empty());
}
