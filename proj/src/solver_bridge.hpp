#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "cnf.hpp"

namespace encls {

enum class SolveStatus { Sat, Unsat, Timeout };

struct SolveStats {
  uint64_t decisions = 0;
  uint64_t propagations = 0;
  uint64_t conflicts = 0;
  bool reported = false;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::Timeout;
  Assignment model;  // total iff status == Sat
  double runtime = 0.0;
  SolveStats stats;
};

// Adapter spawn/communication failures, distinct from TIMEOUT outcomes.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// A backend claimed SAT but its model does not satisfy the formula.
struct SolverIntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class SolverAdapter {
 public:
  virtual ~SolverAdapter() = default;
  virtual std::string name() const = 0;
  virtual bool supports_phase_hints() const = 0;
  virtual bool reports_stats() const = 0;
  // Phases may be empty when the caller wants the backend's own defaults.
  virtual SolveOutcome invoke(const CnfFormula& f, const Assignment& phases,
                              double timeout_seconds) = 0;
};

// Built-in DPLL backend: unit propagation, lowest-unassigned-index decision
// order, phase-first value order, chronological backtracking. Complete and
// deterministic; meant for desk-scale instances and tests.
SolveOutcome mini_solve(const CnfFormula& f, const Assignment& phases,
                        double timeout_seconds);

std::unique_ptr<SolverAdapter> make_mini_adapter();

// How an external backend receives the phase assignment.
enum class PhaseMode {
  None,       // degraded: phases are not delivered, warn once
  PhaseFile,  // side-channel file of signed literals, 0-terminated
};

struct ExternalSolverConfig {
  std::string executable;
  std::vector<std::string> extra_args;
  PhaseMode phase_mode = PhaseMode::PhaseFile;
  // Argument inserted when phase_mode == PhaseFile; "{phases}" is replaced
  // by the phase file path. An empty template appends the bare path.
  std::string phase_arg = "{phases}";
};

// Adapter that writes the DIMACS file, runs the executable on it, and
// parses SAT-competition style output ("s ..." / "v ..." lines).
std::unique_ptr<SolverAdapter> make_external_adapter(ExternalSolverConfig config);

// Runs the adapter and re-validates SAT models; phases must be total.
SolveOutcome solve_with_phases(const CnfFormula& f, const Assignment& phases,
                               double timeout_seconds, SolverAdapter& adapter);

// Reference run without phase preferences (backend defaults).
SolveOutcome solve_plain(const CnfFormula& f, double timeout_seconds,
                         SolverAdapter& adapter);

}  // namespace encls
