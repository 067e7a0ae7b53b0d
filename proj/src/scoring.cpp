#include "scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace encls {

namespace {

bool is_error_status(RunStatus s) {
  return s == RunStatus::RuntimeError || s == RunStatus::InvalidOutput;
}

RunStatus run_status_from_name(const std::string& name) {
  for (RunStatus s : {RunStatus::Ok, RunStatus::SoftTimeoutOk, RunStatus::HardTimeout,
                      RunStatus::RuntimeError, RunStatus::InvalidOutput}) {
    if (name == run_status_name(s)) return s;
  }
  throw std::invalid_argument("unknown run status: " + name);
}

SolveStatus solve_status_from_name(const std::string& name) {
  for (SolveStatus s : {SolveStatus::Sat, SolveStatus::Unsat, SolveStatus::Timeout}) {
    if (name == solve_status_name(s)) return s;
  }
  throw std::invalid_argument("unknown solve status: " + name);
}

}  // namespace

const char* solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Sat: return "SAT";
    case SolveStatus::Unsat: return "UNSAT";
    case SolveStatus::Timeout: return "TIMEOUT";
  }
  return "?";
}

bool EvalRecord::had_runtime_error() const {
  return std::any_of(results.begin(), results.end(),
                     [](const InstanceResult& r) { return is_error_status(r.ls_status); });
}

long EvalRecord::ls_timeouts() const {
  long n = 0;
  for (const auto& r : results) n += !r.ls_returned();
  return n;
}

long EvalRecord::sat_timeouts() const {
  long n = 0;
  for (const auto& r : results) n += r.sat_status && *r.sat_status == SolveStatus::Timeout;
  return n;
}

std::optional<double> EvalRecord::avg_ok_runtime() const {
  double sum = 0.0;
  long n = 0;
  for (const auto& r : results) {
    if (r.solver_finished()) {
      sum += r.sat_seconds;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

bool RankKey::operator<(const RankKey& o) const {
  if (tier != o.tier) return tier < o.tier;
  if (ls_timeouts != o.ls_timeouts) return ls_timeouts < o.ls_timeouts;
  if (sat_timeouts != o.sat_timeouts) return sat_timeouts < o.sat_timeouts;
  if (avg != o.avg) return avg < o.avg;
  return candidate_id < o.candidate_id;
}

RankKey rank_key(const EvalRecord& r) {
  RankKey k;
  k.tier = r.had_runtime_error() ? 1 : 0;
  k.ls_timeouts = r.ls_timeouts();
  k.sat_timeouts = r.sat_timeouts();
  k.avg = r.avg_ok_runtime().value_or(std::numeric_limits<double>::infinity());
  k.candidate_id = r.candidate_id;
  return k;
}

std::vector<EvalRecord> rank(const std::vector<EvalRecord>& records) {
  if (!records.empty()) {
    std::set<std::string> reference;
    for (const auto& r : records.front().results) reference.insert(r.instance);
    for (const auto& rec : records) {
      std::set<std::string> mine;
      for (const auto& r : rec.results) mine.insert(r.instance);
      if (mine != reference)
        throw std::invalid_argument("rank: record '" + rec.candidate_id +
                                    "' covers a different instance set");
    }
  }
  std::vector<EvalRecord> out = records;
  std::sort(out.begin(), out.end(), [](const EvalRecord& a, const EvalRecord& b) {
    return rank_key(a) < rank_key(b);
  });
  return out;
}

std::map<std::string, double> relative_score(
    const std::map<std::string, std::optional<double>>& sat_times) {
  std::optional<double> fastest;
  for (const auto& [id, t] : sat_times) {
    if (t && (!fastest || *t < *fastest)) fastest = *t;
  }
  std::map<std::string, double> out;
  for (const auto& [id, t] : sat_times) {
    if (!t || !fastest) {
      out[id] = 0.0;
    } else if (*t == *fastest) {
      out[id] = 1.0;
    } else {
      out[id] = *fastest / *t;
    }
  }
  return out;
}

const char* significance_name(Significance s) {
  switch (s) {
    case Significance::Better: return "BETTER";
    case Significance::Worse: return "WORSE";
    case Significance::NoChange: return "NO_CHANGE";
  }
  return "?";
}

Significance significance(double prev_avg, double new_avg) {
  if (prev_avg == 0.0) {
    return new_avg > 0.5 ? Significance::Worse : Significance::NoChange;
  }
  const double delta = (new_avg - prev_avg) / prev_avg;
  if (delta < -0.10) return Significance::Better;
  if (delta > 0.10) return Significance::Worse;
  return Significance::NoChange;
}

Significance compare_eval(const EvalRecord& prev, const EvalRecord& next) {
  const bool prev_err = prev.had_runtime_error();
  const bool next_err = next.had_runtime_error();
  if (prev_err != next_err) return next_err ? Significance::Worse : Significance::Better;
  if (prev.ls_timeouts() != next.ls_timeouts())
    return next.ls_timeouts() < prev.ls_timeouts() ? Significance::Better
                                                   : Significance::Worse;
  if (prev.sat_timeouts() != next.sat_timeouts())
    return next.sat_timeouts() < prev.sat_timeouts() ? Significance::Better
                                                     : Significance::Worse;
  const auto prev_avg = prev.avg_ok_runtime();
  const auto next_avg = next.avg_ok_runtime();
  if (!prev_avg && !next_avg) return Significance::NoChange;
  if (!next_avg) return Significance::Worse;
  if (!prev_avg) return Significance::Better;
  return significance(*prev_avg, *next_avg);
}

SplitResult split_train_test(const std::vector<ReferenceOutcome>& reference) {
  SplitResult out;
  for (const auto& r : reference) {
    if (r.status == SolveStatus::Timeout || r.seconds > 60.0) {
      out.test.push_back(r.instance);
    } else if (r.seconds >= 10.0) {
      out.train.push_back(r.instance);
    } else {
      out.discarded.push_back(r.instance);
    }
  }
  return out;
}

std::vector<SolvedNewRow> solved_new_report(
    const std::vector<EvalRecord>& records,
    const std::map<std::string, bool>& baseline_solved) {
  std::vector<SolvedNewRow> rows;
  for (const auto& rec : records) {
    SolvedNewRow row;
    row.candidate_id = rec.candidate_id;
    for (const auto& r : rec.results) {
      if (!r.solver_finished()) continue;
      ++row.solved;
      auto it = baseline_solved.find(r.instance);
      if (it == baseline_solved.end() || !it->second) ++row.new_solved;
    }
    rows.push_back(row);
  }
  return rows;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

std::string eval_row_to_json(const std::string& candidate_id, const InstanceResult& r) {
  nlohmann::json j;
  j["candidate"] = candidate_id;
  j["instance"] = r.instance;
  j["ls_status"] = run_status_name(r.ls_status);
  j["ls_seconds"] = round2(r.ls_seconds);
  if (!r.ls_message.empty()) j["ls_message"] = r.ls_message;
  if (r.ls_error_line) j["ls_error_line"] = *r.ls_error_line;
  if (r.sat_status) {
    j["sat_status"] = solve_status_name(*r.sat_status);
    j["sat_seconds"] = round2(r.sat_seconds);
  }
  return j.dump();
}

EvalRow eval_row_from_json(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  EvalRow row;
  row.candidate_id = j.at("candidate").get<std::string>();
  row.result.instance = j.at("instance").get<std::string>();
  row.result.ls_status = run_status_from_name(j.at("ls_status").get<std::string>());
  row.result.ls_seconds = j.at("ls_seconds").get<double>();
  if (j.contains("ls_message")) row.result.ls_message = j["ls_message"].get<std::string>();
  if (j.contains("ls_error_line")) row.result.ls_error_line = j["ls_error_line"].get<int>();
  if (j.contains("sat_status")) {
    row.result.sat_status = solve_status_from_name(j["sat_status"].get<std::string>());
    row.result.sat_seconds = j.at("sat_seconds").get<double>();
  }
  return row;
}

std::vector<EvalRecord> group_rows(const std::vector<EvalRow>& rows) {
  std::map<std::string, EvalRecord> by_candidate;
  for (const auto& row : rows) {
    EvalRecord& rec = by_candidate[row.candidate_id];
    rec.candidate_id = row.candidate_id;
    rec.results.push_back(row.result);
  }
  std::vector<EvalRecord> out;
  out.reserve(by_candidate.size());
  for (auto& [id, rec] : by_candidate) {
    std::sort(rec.results.begin(), rec.results.end(),
              [](const InstanceResult& a, const InstanceResult& b) {
                return a.instance < b.instance;
              });
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace encls
