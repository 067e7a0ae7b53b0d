#include <chrono>
#include <vector>

#include "solver_bridge.hpp"

namespace encls {

namespace {

using Clock = std::chrono::steady_clock;

class MiniSolver {
 public:
  MiniSolver(const CnfFormula& f, const Assignment& phases, double timeout)
      : f_(f),
        phases_(phases),
        values_(f.num_vars()),
        num_true_(f.num_clauses(), 0),
        num_false_(f.num_clauses(), 0),
        deadline_(Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                     std::chrono::duration<double>(timeout))) {}

  SolveOutcome run() {
    SolveOutcome out;
    out.stats.reported = true;
    auto t0 = Clock::now();
    SolveStatus status = search();
    out.runtime = std::chrono::duration<double>(Clock::now() - t0).count();
    out.status = status;
    out.stats.decisions = decisions_;
    out.stats.propagations = propagations_;
    out.stats.conflicts = conflicts_;
    if (status == SolveStatus::Sat) out.model = values_;
    return out;
  }

 private:
  enum Kind : uint8_t { kDecision, kFlipped, kImplied };
  struct TrailEntry {
    Lit lit;
    Kind kind;
  };

  SolveStatus search() {
    seed_initial_units();
    while (true) {
      if (timed_out()) return SolveStatus::Timeout;
      if (!propagate()) {
        conflicts_++;
        if (!backtrack()) return SolveStatus::Unsat;
        continue;
      }
      Var v = next_unassigned();
      if (v == 0) return SolveStatus::Sat;
      decisions_++;
      bool phase = v <= phases_.size() && phases_.is_assigned(v) ? phases_.value(v) : false;
      assign(phase ? v : -v, kDecision);
    }
  }

  bool timed_out() {
    if (++tick_ % 512 != 0) return false;
    return Clock::now() >= deadline_;
  }

  void seed_initial_units() {
    for (size_t c = 0; c < f_.num_clauses(); ++c) check_clause(static_cast<uint32_t>(c));
  }

  // Inspects a clause with no true literal for unit/conflict status.
  void check_clause(uint32_t c) {
    if (num_true_[c] > 0 || conflict_) return;
    auto cl = f_.clause(c);
    if (static_cast<size_t>(num_false_[c]) == cl.size()) {
      conflict_ = true;
      pending_.clear();
      return;
    }
    Lit unit = 0;
    for (Lit l : cl) {
      if (values_.is_assigned(lit_var(l))) continue;
      if (unit == 0)
        unit = l;
      else if (unit != l)
        return;  // two distinct open literals, nothing forced
    }
    if (unit != 0) pending_.push_back(unit);
  }

  void assign(Lit lit, Kind kind) {
    Var v = lit_var(lit);
    values_.set(v, lit_sign(lit));
    trail_.push_back({lit, kind});
    bool value = lit_sign(lit);
    for (const auto& occ : f_.occurrences(v)) {
      num_true_[occ.clause] += value ? occ.num_pos : occ.num_neg;
      num_false_[occ.clause] += value ? occ.num_neg : occ.num_pos;
      check_clause(occ.clause);
    }
  }

  void unassign() {
    auto [lit, kind] = trail_.back();
    trail_.pop_back();
    Var v = lit_var(lit);
    bool value = lit_sign(lit);
    values_.unset(v);
    for (const auto& occ : f_.occurrences(v)) {
      num_true_[occ.clause] -= value ? occ.num_pos : occ.num_neg;
      num_false_[occ.clause] -= value ? occ.num_neg : occ.num_pos;
    }
  }

  bool propagate() {
    while (!pending_.empty()) {
      if (conflict_) break;
      Lit lit = pending_.back();
      pending_.pop_back();
      Var v = lit_var(lit);
      if (values_.is_assigned(v)) {
        if (values_.value(v) != lit_sign(lit)) {
          conflict_ = true;
          break;
        }
        continue;
      }
      propagations_++;
      assign(lit, kImplied);
    }
    if (conflict_) {
      pending_.clear();
      return false;
    }
    return true;
  }

  // Chronological: undo to the most recent un-flipped decision and try the
  // opposite value there.
  bool backtrack() {
    conflict_ = false;
    pending_.clear();
    while (!trail_.empty()) {
      auto [lit, kind] = trail_.back();
      if (kind == kDecision) {
        unassign();
        assign(-lit, kFlipped);
        return true;
      }
      unassign();
    }
    return false;
  }

  Var next_unassigned() {
    for (Var v = 1; v <= f_.num_vars(); ++v)
      if (!values_.is_assigned(v)) return v;
    return 0;
  }

  const CnfFormula& f_;
  const Assignment& phases_;
  Assignment values_;
  std::vector<int32_t> num_true_, num_false_;
  std::vector<Lit> pending_;
  std::vector<TrailEntry> trail_;
  bool conflict_ = false;
  uint64_t decisions_ = 0, propagations_ = 0, conflicts_ = 0, tick_ = 0;
  Clock::time_point deadline_;
};

class MiniAdapter final : public SolverAdapter {
 public:
  std::string name() const override { return "mini"; }
  bool supports_phase_hints() const override { return true; }
  bool reports_stats() const override { return true; }
  SolveOutcome invoke(const CnfFormula& f, const Assignment& phases,
                      double timeout_seconds) override {
    return mini_solve(f, phases, timeout_seconds);
  }
};

}  // namespace

SolveOutcome mini_solve(const CnfFormula& f, const Assignment& phases,
                        double timeout_seconds) {
  MiniSolver solver(f, phases, timeout_seconds);
  SolveOutcome out = solver.run();
  if (out.status == SolveStatus::Sat && count_unsat(f, out.model).unsat != 0)
    throw SolverIntegrityError("mini solver produced a non-model");
  return out;
}

std::unique_ptr<SolverAdapter> make_mini_adapter() {
  return std::make_unique<MiniAdapter>();
}

}  // namespace encls
