#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace encls {

// Variables are 1-based and dense; literals use the signed DIMACS
// convention (positive literal = +var, negated = -var).
using Var = int;
using Lit = int;

inline Var lit_var(Lit l) { return l < 0 ? -l : l; }
inline bool lit_sign(Lit l) { return l > 0; }

// A (possibly partial) truth assignment over variables 1..size.
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(int num_vars) : values_(num_vars + 1, kUnset) {}

  int size() const { return static_cast<int>(values_.empty() ? 0 : values_.size() - 1); }
  void resize(int num_vars) { values_.resize(num_vars + 1, kUnset); }

  bool is_assigned(Var v) const { return values_[v] != kUnset; }
  bool value(Var v) const { return values_[v] == 1; }
  std::optional<bool> get(Var v) const {
    if (v < 1 || v > size() || values_[v] == kUnset) return std::nullopt;
    return values_[v] == 1;
  }
  void set(Var v, bool b) { values_[v] = b ? 1 : 0; }
  void unset(Var v) { values_[v] = kUnset; }

  bool satisfies(Lit l) const {
    Var v = lit_var(l);
    return values_[v] != kUnset && (values_[v] == 1) == lit_sign(l);
  }
  bool falsifies(Lit l) const {
    Var v = lit_var(l);
    return values_[v] != kUnset && (values_[v] == 1) != lit_sign(l);
  }

  int assigned_count() const {
    int n = 0;
    for (size_t i = 1; i < values_.size(); ++i) n += values_[i] != kUnset;
    return n;
  }
  bool is_total() const { return assigned_count() == size(); }

  bool operator==(const Assignment&) const = default;

 private:
  static constexpr int8_t kUnset = -1;
  std::vector<int8_t> values_;
};

// Result of flipping one variable: `made` clauses turned unsatisfied ->
// satisfied, `broken` turned satisfied -> unsatisfied.
struct FlipScore {
  int made = 0;
  int broken = 0;
  int score = 0;  // made - broken
};

struct ClauseCounts {
  size_t unsat = 0;
  size_t undetermined = 0;
};

// Clause database stored as a flat literal array with per-variable
// occurrence lists, so flip scoring touches only the clauses containing
// the flipped variable. Formulas are immutable once built and can be
// shared freely across threads.
class CnfFormula {
 public:
  CnfFormula() { starts_.push_back(0); }
  explicit CnfFormula(int num_vars) {
    starts_.push_back(0);
    set_num_vars(num_vars);
  }

  int num_vars() const { return num_vars_; }
  size_t num_clauses() const { return starts_.size() - 1; }

  void set_num_vars(int n) { num_vars_ = n; occ_.resize(n + 1); }

  // Appends a clause; literals must be nonzero with var <= num_vars.
  void add_clause(std::span<const Lit> lits);
  void add_clause(std::initializer_list<Lit> lits) {
    add_clause(std::span<const Lit>(lits.begin(), lits.size()));
  }

  std::span<const Lit> clause(size_t i) const {
    return {lits_.data() + starts_[i], lits_.data() + starts_[i + 1]};
  }

  // Occurrence entry: how often variable appears in clause, per polarity.
  struct Occ {
    uint32_t clause;
    int16_t num_pos;
    int16_t num_neg;
  };
  std::span<const Occ> occurrences(Var v) const {
    return {occ_[v].data(), occ_[v].size()};
  }

  bool operator==(const CnfFormula& o) const {
    return num_vars_ == o.num_vars_ && lits_ == o.lits_ && starts_ == o.starts_;
  }

 private:
  int num_vars_ = 0;
  std::vector<Lit> lits_;
  std::vector<uint32_t> starts_;
  std::vector<std::vector<Occ>> occ_{1};
};

struct DimacsError : std::runtime_error {
  DimacsError(int line_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
  int line;
};

CnfFormula parse_dimacs(std::istream& in);
CnfFormula parse_dimacs(std::string_view text);
void write_dimacs(const CnfFormula& f, std::ostream& out);
std::string write_dimacs(const CnfFormula& f);

// Clause status is three-valued under partial assignments: a clause with no
// satisfied literal but at least one unassigned one counts as undetermined.
ClauseCounts count_unsat(const CnfFormula& f, const Assignment& a);

// S/U as if `v` were flipped under the total assignment `a`; `a` is left
// untouched. O(occurrences of v).
FlipScore conflict_score(const CnfFormula& f, const Assignment& a, Var v);

struct PropagateResult {
  bool conflict = false;
  Assignment assignment;  // fixpoint, or the partial extension at conflict
};

// Unit propagation to fixpoint. Conflict iff some clause is falsified by
// the extension. Only extends the input; never unassigns.
PropagateResult unit_propagate(const CnfFormula& f, const Assignment& a);

// Extends `a` to a total assignment over f's variables with `default_value`.
Assignment complete_assignment(const CnfFormula& f, const Assignment& a,
                               bool default_value);

}  // namespace encls
