#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cnf.hpp"
#include "instances.hpp"
#include "rng.hpp"
#include "varmap.hpp"

namespace encls {

struct SearchParams {
  uint64_t seed = 0;
  double soft_timeout_seconds = 10.0;
  double noise = 0.5;
  int sample_size = 20;
  int tabu_tenure = 10;
  std::optional<long> max_flips;
  int stagnation_window = 200;
};

struct SearchOutcome {
  Assignment assignment;
  long flips = 0;
  size_t best_unsat = 0;
  double elapsed_seconds = 0.0;
  bool found_model = false;
};

// Incremental flip bookkeeping over a total assignment. Tracks the number of
// true literals per clause and the unsat clause list, so score_flip and flip
// cost O(occurrences of v) instead of a full rescan.
class SearchState {
 public:
  SearchState(const CnfFormula& f, Assignment initial);

  const Assignment& assignment() const { return assignment_; }
  size_t unsat_count() const { return unsat_.size(); }
  const std::vector<uint32_t>& unsat_clauses() const { return unsat_; }

  FlipScore score_flip(Var v) const;
  void flip(Var v);

  // Recomputes the unsat count from scratch; used by tests to validate the
  // incremental counters.
  size_t recount_unsat() const;

 private:
  const CnfFormula* formula_;
  Assignment assignment_;
  std::vector<int> true_count_;       // per clause
  std::vector<uint32_t> unsat_;       // clause indices, unordered
  std::vector<uint32_t> unsat_pos_;   // clause -> index into unsat_, or npos
};

// Noise-driven clause walk: pick a random unsat clause; with probability
// `noise` flip a random variable of it, otherwise the clause variable with
// the best conflict score (seeded tie-break). A satisfied starting point
// returns immediately with flips=0. When `init` is partial it is completed
// with false; without `init` the start is seeded-random.
SearchOutcome walksat(const CnfFormula& f, const SearchParams& p,
                      std::optional<Assignment> init = std::nullopt);

// Greedy best-flip over all variables with seeded tie-breaks; restarts from
// a fresh random assignment when best_unsat stalls for stagnation_window
// flips.
SearchOutcome gsat(const CnfFormula& f, const SearchParams& p,
                   std::optional<Assignment> init = std::nullopt);

// Each iteration samples sample_size distinct non-tabu variables and flips
// the best by conflict score, marking it tabu for tabu_tenure iterations.
// While best_unsat has stalled for stagnation_window iterations the sample
// pool switches to the variables whose flips improved the unsat count most
// often. A window of 0 keeps the frequency pool active from the start.
SearchOutcome tabu_sampled(const CnfFormula& f, const SearchParams& p,
                           const VarMap& vm,
                           std::optional<Assignment> init = std::nullopt);

// Color-space search that never touches CNF until the end: greedy
// degree-descending initialization picking the color with the fewest
// monochromatic edges, then min-conflicts moves on endpoints of
// monochromatic edges. The best coloring seen is converted to an x(v,c)
// assignment through the varmap on return; best_unsat counts its
// monochromatic edges, which equals the number of violated clauses.
SearchOutcome coloring_native_search(const Graph& g, int k,
                                     const SearchParams& p, const VarMap& vm);

// Tree-space search over the bounded-depth tree encoding: every internal
// node starts with a random feature and the middle cut, leaf classes start
// at the majority label of the rows routed to them, and the path variables
// are filled in to match the routing. Flips then work level by level (root
// first, leaf classes last), picking a random unsat clause with a
// current-level variable and flipping its best conflict-score variable;
// stagnation advances the level, wrapping back to the root.
SearchOutcome bddt_level_search(const CnfFormula& f, const Dataset& d,
                                int depth, const VarMap& vm,
                                const SearchParams& p);

}  // namespace encls
