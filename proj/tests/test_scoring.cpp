#include <doctest.h>

#include "scoring.hpp"

using namespace encls;

namespace {

InstanceResult clean_result(const std::string& instance, double sat_seconds) {
  InstanceResult r;
  r.instance = instance;
  r.ls_status = RunStatus::Ok;
  r.ls_seconds = 0.5;
  r.sat_status = SolveStatus::Sat;
  r.sat_seconds = sat_seconds;
  return r;
}

InstanceResult solver_timeout(const std::string& instance) {
  InstanceResult r;
  r.instance = instance;
  r.ls_status = RunStatus::Ok;
  r.ls_seconds = 0.5;
  r.sat_status = SolveStatus::Timeout;
  r.sat_seconds = 0.0;
  return r;
}

InstanceResult ls_timeout(const std::string& instance) {
  InstanceResult r;
  r.instance = instance;
  r.ls_status = RunStatus::HardTimeout;
  r.ls_seconds = 0.0;
  return r;
}

InstanceResult errored(const std::string& instance) {
  InstanceResult r;
  r.instance = instance;
  r.ls_status = RunStatus::RuntimeError;
  r.ls_message = "boom";
  r.ls_error_line = 3;
  return r;
}

EvalRecord record(const std::string& id, std::vector<InstanceResult> results) {
  return EvalRecord{id, std::move(results)};
}

}  // namespace

TEST_CASE("eval record counters") {
  EvalRecord r = record("c", {clean_result("a", 10), solver_timeout("b"),
                              ls_timeout("c"), errored("d")});
  CHECK(r.had_runtime_error());
  CHECK(r.ls_timeouts() == 2);
  CHECK(r.sat_timeouts() == 1);
  REQUIRE(r.avg_ok_runtime().has_value());
  CHECK(*r.avg_ok_runtime() == 10.0);

  EvalRecord empty = record("e", {ls_timeout("a")});
  CHECK_FALSE(empty.avg_ok_runtime().has_value());
  CHECK_FALSE(empty.had_runtime_error());
}

TEST_CASE("fewer solver timeouts beat a better average") {
  EvalRecord x = record("X", {clean_result("a", 30), solver_timeout("b")});
  EvalRecord y = record("Y", {clean_result("a", 50), clean_result("b", 50)});
  auto ranked = rank({x, y});
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].candidate_id == "Y");
  CHECK(ranked[1].candidate_id == "X");
}

TEST_CASE("errored candidates rank last") {
  EvalRecord good = record("slow", {clean_result("a", 500)});
  EvalRecord bad = record("fast-but-broken", {errored("a")});
  auto ranked = rank({bad, good});
  CHECK(ranked[0].candidate_id == "slow");
  CHECK(ranked[1].candidate_id == "fast-but-broken");
  CHECK(rank_key(bad).tier == 1);
  CHECK(rank_key(good).tier == 0);
}

TEST_CASE("undefined averages order after defined ones") {
  EvalRecord defined = record("a", {clean_result("i", 20), solver_timeout("j")});
  EvalRecord undefined = record("b", {solver_timeout("i"), solver_timeout("j")});
  auto ranked = rank({undefined, defined});
  CHECK(ranked[0].candidate_id == "a");
}

TEST_CASE("candidate id breaks exact ties") {
  EvalRecord a = record("alpha", {clean_result("i", 10)});
  EvalRecord b = record("beta", {clean_result("i", 10)});
  auto ranked = rank({b, a});
  CHECK(ranked[0].candidate_id == "alpha");
}

TEST_CASE("rank rejects mismatched instance sets") {
  EvalRecord a = record("a", {clean_result("i", 10)});
  EvalRecord b = record("b", {clean_result("j", 10)});
  CHECK_THROWS(rank({a, b}));
}

TEST_CASE("relative score normalizes to the fastest") {
  std::map<std::string, std::optional<double>> times{
      {"A", 10.0}, {"B", 20.0}, {"C", std::nullopt}};
  auto scores = relative_score(times);
  CHECK(scores["A"] == 1.0);
  CHECK(scores["B"] == 0.5);
  CHECK(scores["C"] == 0.0);
}

TEST_CASE("relative score of a lone finisher is exactly one") {
  std::map<std::string, std::optional<double>> times{{"only", 37.2}};
  auto scores = relative_score(times);
  CHECK(scores["only"] == 1.0);
}

TEST_CASE("relative score with no finishers is all zeros") {
  std::map<std::string, std::optional<double>> times{
      {"A", std::nullopt}, {"B", std::nullopt}};
  auto scores = relative_score(times);
  CHECK(scores["A"] == 0.0);
  CHECK(scores["B"] == 0.0);
}

TEST_CASE("significance uses a strict ten percent rule") {
  CHECK(significance(100.0, 89.0) == Significance::Better);
  CHECK(significance(100.0, 95.0) == Significance::NoChange);
  CHECK(significance(100.0, 90.0) == Significance::NoChange);
  CHECK(significance(100.0, 110.0) == Significance::NoChange);
  CHECK(significance(100.0, 111.0) == Significance::Worse);
}

TEST_CASE("significance from a zero baseline uses the half second rule") {
  CHECK(significance(0.0, 0.6) == Significance::Worse);
  CHECK(significance(0.0, 0.4) == Significance::NoChange);
}

TEST_CASE("compare_eval prefers fixing errors over runtimes") {
  EvalRecord broken = record("v1", {errored("a"), clean_result("b", 5)});
  EvalRecord fixed = record("v2", {clean_result("a", 50), clean_result("b", 50)});
  CHECK(compare_eval(broken, fixed) == Significance::Better);
  CHECK(compare_eval(fixed, broken) == Significance::Worse);
}

TEST_CASE("compare_eval counts solved instances before runtimes") {
  EvalRecord two = record("v1", {clean_result("a", 5), solver_timeout("b")});
  EvalRecord three = record("v2", {clean_result("a", 20), clean_result("b", 20)});
  CHECK(compare_eval(two, three) == Significance::Better);
  CHECK(compare_eval(three, two) == Significance::Worse);
}

TEST_CASE("compare_eval falls back to the runtime rule") {
  EvalRecord slow = record("v1", {clean_result("a", 100)});
  EvalRecord fast = record("v2", {clean_result("a", 89)});
  EvalRecord similar = record("v3", {clean_result("a", 95)});
  CHECK(compare_eval(slow, fast) == Significance::Better);
  CHECK(compare_eval(slow, similar) == Significance::NoChange);
  CHECK(compare_eval(fast, slow) == Significance::Worse);
}

TEST_CASE("split thresholds") {
  std::vector<ReferenceOutcome> reference{
      {"mid", SolveStatus::Sat, 30.0},
      {"fast", SolveStatus::Sat, 5.0},
      {"slow", SolveStatus::Sat, 61.0},
      {"stuck", SolveStatus::Timeout, 3600.0},
      {"low-edge", SolveStatus::Sat, 10.0},
      {"high-edge", SolveStatus::Sat, 60.0},
  };
  SplitResult split = split_train_test(reference);
  CHECK(split.train == std::vector<std::string>{"mid", "low-edge", "high-edge"});
  CHECK(split.test == std::vector<std::string>{"slow", "stuck"});
  CHECK(split.discarded == std::vector<std::string>{"fast"});
}

TEST_CASE("solved and new counts against the baseline") {
  EvalRecord cand = record("c", {clean_result("a", 5), clean_result("b", 5),
                                 clean_result("c", 5), solver_timeout("d")});
  std::map<std::string, bool> baseline{
      {"a", true}, {"b", true}, {"c", false}, {"d", true}};
  auto rows = solved_new_report({cand}, baseline);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].candidate_id == "c");
  CHECK(rows[0].solved == 3);
  CHECK(rows[0].new_solved == 1);
}

TEST_CASE("solving nothing reports zeros") {
  EvalRecord cand = record("c", {ls_timeout("a"), solver_timeout("b")});
  std::map<std::string, bool> baseline{{"a", true}, {"b", false}};
  auto rows = solved_new_report({cand}, baseline);
  CHECK(rows[0].solved == 0);
  CHECK(rows[0].new_solved == 0);
}

TEST_CASE("matching the baseline finds nothing new") {
  EvalRecord cand = record("c", {clean_result("a", 5), clean_result("b", 5)});
  std::map<std::string, bool> baseline{{"a", true}, {"b", true}};
  auto rows = solved_new_report({cand}, baseline);
  CHECK(rows[0].solved == 2);
  CHECK(rows[0].new_solved == 0);
}

TEST_CASE("eval rows survive the json round trip") {
  InstanceResult r = clean_result("graph-07", 12.3456);
  r.ls_status = RunStatus::SoftTimeoutOk;
  std::string line = eval_row_to_json("cand-3", r);
  EvalRow row = eval_row_from_json(line);
  CHECK(row.candidate_id == "cand-3");
  CHECK(row.result.instance == "graph-07");
  CHECK(row.result.ls_status == RunStatus::SoftTimeoutOk);
  CHECK(row.result.sat_status == SolveStatus::Sat);
  CHECK(row.result.sat_seconds == 12.35);

  InstanceResult e = errored("graph-08");
  EvalRow back = eval_row_from_json(eval_row_to_json("cand-4", e));
  CHECK(back.result.ls_status == RunStatus::RuntimeError);
  CHECK(back.result.ls_message == "boom");
  CHECK(back.result.ls_error_line == 3);
  CHECK_FALSE(back.result.sat_status.has_value());
}

TEST_CASE("group_rows rebuilds per-candidate records sorted by id") {
  std::vector<EvalRow> rows{
      {"b", clean_result("i2", 2)},
      {"a", clean_result("i1", 1)},
      {"b", clean_result("i1", 3)},
  };
  auto records = group_rows(rows);
  REQUIRE(records.size() == 2);
  CHECK(records[0].candidate_id == "a");
  CHECK(records[1].candidate_id == "b");
  CHECK(records[1].results.size() == 2);
}

TEST_CASE("round2 keeps two decimals") {
  CHECK(round2(1.234) == 1.23);
  CHECK(round2(1.236) == 1.24);
  CHECK(round2(0.0) == 0.0);
  CHECK(round2(-1.236) == -1.24);
  CHECK(round2(59.999) == 60.0);
}
