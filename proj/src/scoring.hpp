#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "runner.hpp"
#include "solver_bridge.hpp"

namespace encls {

const char* solve_status_name(SolveStatus s);

// One candidate x instance measurement: the local-search run, and the
// phase-seeded solver call when the search returned an assignment. A missing
// sat_status means the solver was skipped.
struct InstanceResult {
  std::string instance;
  RunStatus ls_status = RunStatus::HardTimeout;
  double ls_seconds = 0.0;
  std::string ls_message;
  std::optional<int> ls_error_line;
  std::optional<SolveStatus> sat_status;
  double sat_seconds = 0.0;

  bool ls_returned() const {
    return ls_status == RunStatus::Ok || ls_status == RunStatus::SoftTimeoutOk;
  }
  bool solver_finished() const {
    return sat_status && *sat_status != SolveStatus::Timeout;
  }
};

struct EvalRecord {
  std::string candidate_id;
  std::vector<InstanceResult> results;

  bool had_runtime_error() const;
  long ls_timeouts() const;   // instances where no assignment came back
  long sat_timeouts() const;  // solver calls that hit the limit
  std::optional<double> avg_ok_runtime() const;  // over finished solver calls
};

// Lexicographic sort key: errored candidates last, then fewest LS timeouts,
// fewest solver timeouts, lowest average runtime (undefined ordered as
// +infinity), candidate id as the stable tie-break.
struct RankKey {
  int tier = 0;
  long ls_timeouts = 0;
  long sat_timeouts = 0;
  double avg = 0.0;
  std::string candidate_id;

  bool operator<(const RankKey& o) const;
};

RankKey rank_key(const EvalRecord& r);

// Sorted copy, best first. Throws when the records do not cover the same
// instance set.
std::vector<EvalRecord> rank(const std::vector<EvalRecord>& records);

// Per-instance relative score: fastest finished time divided by the
// candidate's time; unfinished (nullopt) scores 0. The fastest candidate
// scores exactly 1.0.
std::map<std::string, double> relative_score(
    const std::map<std::string, std::optional<double>>& sat_times);

enum class Significance { Better, Worse, NoChange };

const char* significance_name(Significance s);

// Strictly-more-than-10% average runtime change. A prev of 0 treats any new
// average above 0.5 s as Worse, below as NoChange.
Significance significance(double prev_avg, double new_avg);

// Refinement feedback between two evaluations: error tier and solved-count
// changes dominate; only when those tie does the 10% runtime rule speak.
Significance compare_eval(const EvalRecord& prev, const EvalRecord& next);

// Reference-run split: train = solved in [10, 60] s, test = everything the
// solver alone could not finish within 60 s (timeouts included), instances
// under 10 s are dropped.
struct SplitResult {
  std::vector<std::string> train;
  std::vector<std::string> test;
  std::vector<std::string> discarded;
};

struct ReferenceOutcome {
  std::string instance;
  SolveStatus status = SolveStatus::Timeout;
  double seconds = 0.0;
};

SplitResult split_train_test(const std::vector<ReferenceOutcome>& reference);

struct SolvedNewRow {
  std::string candidate_id;
  long solved = 0;
  long new_solved = 0;
};

// Solved = instances the solver finished with the candidate's phases;
// New = those the baseline (solver alone) did not finish.
std::vector<SolvedNewRow> solved_new_report(
    const std::vector<EvalRecord>& records,
    const std::map<std::string, bool>& baseline_solved);

// JSONL persistence: one line per candidate x instance, timings rounded to
// two decimals. Rows regroup into EvalRecords sorted by candidate id.
std::string eval_row_to_json(const std::string& candidate_id, const InstanceResult& r);

struct EvalRow {
  std::string candidate_id;
  InstanceResult result;
};

EvalRow eval_row_from_json(const std::string& line);
std::vector<EvalRecord> group_rows(const std::vector<EvalRow>& rows);

double round2(double x);

}  // namespace encls
