#include "localsearch.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <stdexcept>

namespace encls {

namespace {

constexpr uint32_t kNoPos = UINT32_MAX;

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

Assignment random_total(const CnfFormula& f, Rng& rng) {
  Assignment a(f.num_vars());
  for (Var v = 1; v <= f.num_vars(); ++v) a.set(v, rng.next_bool());
  return a;
}

Assignment make_start(const CnfFormula& f, std::optional<Assignment>& init, Rng& rng) {
  if (!init) return random_total(f, rng);
  Assignment a = std::move(*init);
  if (a.size() < f.num_vars()) a.resize(f.num_vars());
  return complete_assignment(f, a, false);
}

// Best conflict-score variable among the distinct variables of a clause,
// ties broken by a seeded reservoir draw.
Var best_in_clause(const SearchState& state, std::span<const Lit> lits, Rng& rng) {
  Var best = 0;
  int best_score = INT_MIN;
  uint64_t ties = 0;
  for (size_t i = 0; i < lits.size(); ++i) {
    Var v = lit_var(lits[i]);
    bool seen = false;
    for (size_t j = 0; j < i; ++j) {
      if (lit_var(lits[j]) == v) {
        seen = true;
        break;
      }
    }
    if (seen) continue;
    int score = state.score_flip(v).score;
    if (score > best_score) {
      best_score = score;
      best = v;
      ties = 1;
    } else if (score == best_score) {
      ++ties;
      if (rng.next_below(ties) == 0) best = v;
    }
  }
  return best;
}

bool budget_spent(const SearchParams& p, const Stopwatch& watch, long flips) {
  if (p.max_flips && flips >= *p.max_flips) return true;
  return watch.seconds() >= p.soft_timeout_seconds;
}

}  // namespace

SearchState::SearchState(const CnfFormula& f, Assignment initial)
    : formula_(&f), assignment_(std::move(initial)) {
  if (assignment_.size() < f.num_vars()) assignment_.resize(f.num_vars());
  for (Var v = 1; v <= f.num_vars(); ++v) {
    if (!assignment_.is_assigned(v))
      throw std::invalid_argument("search state requires a total assignment");
  }
  true_count_.assign(f.num_clauses(), 0);
  unsat_pos_.assign(f.num_clauses(), kNoPos);
  for (size_t c = 0; c < f.num_clauses(); ++c) {
    int t = 0;
    for (Lit l : f.clause(c))
      if (assignment_.satisfies(l)) ++t;
    true_count_[c] = t;
    if (t == 0) {
      unsat_pos_[c] = static_cast<uint32_t>(unsat_.size());
      unsat_.push_back(static_cast<uint32_t>(c));
    }
  }
}

FlipScore SearchState::score_flip(Var v) const {
  FlipScore fs;
  const bool val = assignment_.value(v);
  for (const auto& occ : formula_->occurrences(v)) {
    const int cur = val ? occ.num_pos : occ.num_neg;
    const int nxt = val ? occ.num_neg : occ.num_pos;
    const int before = true_count_[occ.clause];
    const int after = before - cur + nxt;
    if (before == 0 && after > 0) ++fs.made;
    if (before > 0 && after == 0) ++fs.broken;
  }
  fs.score = fs.made - fs.broken;
  return fs;
}

void SearchState::flip(Var v) {
  const bool val = assignment_.value(v);
  for (const auto& occ : formula_->occurrences(v)) {
    const int cur = val ? occ.num_pos : occ.num_neg;
    const int nxt = val ? occ.num_neg : occ.num_pos;
    const int before = true_count_[occ.clause];
    const int after = before - cur + nxt;
    true_count_[occ.clause] = after;
    if (before == 0 && after > 0) {
      const uint32_t pos = unsat_pos_[occ.clause];
      const uint32_t last = unsat_.back();
      unsat_[pos] = last;
      unsat_pos_[last] = pos;
      unsat_.pop_back();
      unsat_pos_[occ.clause] = kNoPos;
    } else if (before > 0 && after == 0) {
      unsat_pos_[occ.clause] = static_cast<uint32_t>(unsat_.size());
      unsat_.push_back(occ.clause);
    }
  }
  assignment_.set(v, !val);
}

size_t SearchState::recount_unsat() const {
  return count_unsat(*formula_, assignment_).unsat;
}

SearchOutcome walksat(const CnfFormula& f, const SearchParams& p,
                      std::optional<Assignment> init) {
  Stopwatch watch;
  Rng rng(p.seed);
  SearchState state(f, make_start(f, init, rng));

  SearchOutcome out;
  out.assignment = state.assignment();
  out.best_unsat = state.unsat_count();

  while (true) {
    if (state.unsat_count() == 0) {
      out.found_model = true;
      out.best_unsat = 0;
      out.assignment = state.assignment();
      break;
    }
    if (budget_spent(p, watch, out.flips)) break;

    const auto& unsat = state.unsat_clauses();
    const uint32_t cl = unsat[rng.next_below(unsat.size())];
    const auto lits = f.clause(cl);
    Var pick;
    if (rng.next_double() < p.noise) {
      pick = lit_var(lits[rng.next_below(lits.size())]);
    } else {
      pick = best_in_clause(state, lits, rng);
    }
    state.flip(pick);
    ++out.flips;
    if (state.unsat_count() < out.best_unsat) {
      out.best_unsat = state.unsat_count();
      out.assignment = state.assignment();
    }
  }
  out.elapsed_seconds = watch.seconds();
  return out;
}

SearchOutcome gsat(const CnfFormula& f, const SearchParams& p,
                   std::optional<Assignment> init) {
  Stopwatch watch;
  Rng rng(p.seed);
  SearchState state(f, make_start(f, init, rng));

  SearchOutcome out;
  out.assignment = state.assignment();
  out.best_unsat = state.unsat_count();
  long since_improve = 0;

  while (true) {
    if (state.unsat_count() == 0) {
      out.found_model = true;
      out.best_unsat = 0;
      out.assignment = state.assignment();
      break;
    }
    if (budget_spent(p, watch, out.flips)) break;

    if (since_improve >= p.stagnation_window) {
      state = SearchState(f, random_total(f, rng));
      since_improve = 0;
      continue;
    }

    Var pick = 0;
    int best_score = INT_MIN;
    uint64_t ties = 0;
    for (Var v = 1; v <= f.num_vars(); ++v) {
      const int score = state.score_flip(v).score;
      if (score > best_score) {
        best_score = score;
        pick = v;
        ties = 1;
      } else if (score == best_score) {
        ++ties;
        if (rng.next_below(ties) == 0) pick = v;
      }
    }
    state.flip(pick);
    ++out.flips;
    if (state.unsat_count() < out.best_unsat) {
      out.best_unsat = state.unsat_count();
      out.assignment = state.assignment();
      since_improve = 0;
    } else {
      ++since_improve;
    }
  }
  out.elapsed_seconds = watch.seconds();
  return out;
}

SearchOutcome tabu_sampled(const CnfFormula& f, const SearchParams& p,
                           const VarMap& vm, std::optional<Assignment> init) {
  (void)vm;
  if (p.sample_size < 1) throw std::invalid_argument("tabu: sample_size must be >= 1");
  Stopwatch watch;
  Rng rng(p.seed);
  SearchState state(f, make_start(f, init, rng));

  SearchOutcome out;
  out.assignment = state.assignment();
  out.best_unsat = state.unsat_count();

  const int n = f.num_vars();
  std::vector<long> tabu_until(static_cast<size_t>(n) + 1, 0);
  std::vector<long> improve_count(static_cast<size_t>(n) + 1, 0);
  long since_improve = 0;
  long iteration = 1;
  std::vector<Var> pool;
  pool.reserve(static_cast<size_t>(n));

  while (true) {
    if (state.unsat_count() == 0) {
      out.found_model = true;
      out.best_unsat = 0;
      out.assignment = state.assignment();
      break;
    }
    if (budget_spent(p, watch, out.flips)) break;

    pool.clear();
    for (Var v = 1; v <= n; ++v)
      if (tabu_until[static_cast<size_t>(v)] < iteration) pool.push_back(v);
    if (pool.empty())
      for (Var v = 1; v <= n; ++v) pool.push_back(v);

    const size_t sample = std::min(pool.size(), static_cast<size_t>(p.sample_size));
    if (since_improve >= p.stagnation_window) {
      // Frequency-biased pool: the non-tabu variables whose flips have
      // improved the unsat count most often.
      std::partial_sort(pool.begin(), pool.begin() + static_cast<long>(sample),
                        pool.end(), [&](Var a, Var b) {
                          const long ca = improve_count[static_cast<size_t>(a)];
                          const long cb = improve_count[static_cast<size_t>(b)];
                          if (ca != cb) return ca > cb;
                          return a < b;
                        });
    } else if (sample < pool.size()) {
      for (size_t i = 0; i < sample; ++i) {
        const size_t j = i + static_cast<size_t>(rng.next_below(pool.size() - i));
        std::swap(pool[i], pool[j]);
      }
    }

    Var pick = 0;
    int best_score = INT_MIN;
    uint64_t ties = 0;
    for (size_t i = 0; i < sample; ++i) {
      const int score = state.score_flip(pool[i]).score;
      if (score > best_score) {
        best_score = score;
        pick = pool[i];
        ties = 1;
      } else if (score == best_score) {
        ++ties;
        if (rng.next_below(ties) == 0) pick = pool[i];
      }
    }

    const size_t before = state.unsat_count();
    state.flip(pick);
    ++out.flips;
    tabu_until[static_cast<size_t>(pick)] = iteration + p.tabu_tenure;
    if (state.unsat_count() < before) ++improve_count[static_cast<size_t>(pick)];
    if (state.unsat_count() < out.best_unsat) {
      out.best_unsat = state.unsat_count();
      out.assignment = state.assignment();
      since_improve = 0;
    } else {
      ++since_improve;
    }
    ++iteration;
  }
  out.elapsed_seconds = watch.seconds();
  return out;
}

SearchOutcome coloring_native_search(const Graph& g, int k,
                                     const SearchParams& p, const VarMap& vm) {
  if (k < 1) throw std::invalid_argument("coloring search: k must be >= 1");
  Stopwatch watch;
  Rng rng(p.seed);

  std::vector<std::vector<int>> adj(static_cast<size_t>(g.n) + 1);
  for (const auto& [u, v] : g.edges) {
    adj[static_cast<size_t>(u)].push_back(v);
    adj[static_cast<size_t>(v)].push_back(u);
  }

  std::vector<int> order(static_cast<size_t>(g.n));
  for (int v = 1; v <= g.n; ++v) order[static_cast<size_t>(v) - 1] = v;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const size_t da = adj[static_cast<size_t>(a)].size();
    const size_t db = adj[static_cast<size_t>(b)].size();
    if (da != db) return da > db;
    return a < b;
  });

  std::vector<int> color(static_cast<size_t>(g.n) + 1, 0);
  std::vector<int> counts(static_cast<size_t>(k) + 1, 0);
  for (int v : order) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int u : adj[static_cast<size_t>(v)])
      if (color[static_cast<size_t>(u)] != 0) ++counts[static_cast<size_t>(color[static_cast<size_t>(u)])];
    int best = 1;
    for (int c = 2; c <= k; ++c)
      if (counts[static_cast<size_t>(c)] < counts[static_cast<size_t>(best)]) best = c;
    color[static_cast<size_t>(v)] = best;
  }

  auto mono_degree = [&](int v) {
    int d = 0;
    for (int u : adj[static_cast<size_t>(v)])
      if (color[static_cast<size_t>(u)] == color[static_cast<size_t>(v)]) ++d;
    return d;
  };
  long mono_edges = 0;
  for (const auto& [u, v] : g.edges)
    if (color[static_cast<size_t>(u)] == color[static_cast<size_t>(v)]) ++mono_edges;

  std::vector<int> best_color = color;
  long best_mono = mono_edges;

  SearchOutcome out;
  std::vector<int> conflicted;
  while (true) {
    if (mono_edges == 0) break;
    if (budget_spent(p, watch, out.flips)) break;

    conflicted.clear();
    for (int v = 1; v <= g.n; ++v)
      if (mono_degree(v) > 0) conflicted.push_back(v);
    const int v = conflicted[static_cast<size_t>(rng.next_below(conflicted.size()))];

    std::fill(counts.begin(), counts.end(), 0);
    for (int u : adj[static_cast<size_t>(v)]) ++counts[static_cast<size_t>(color[static_cast<size_t>(u)])];
    int pick = 0;
    int best_cnt = INT_MAX;
    uint64_t ties = 0;
    for (int c = 1; c <= k; ++c) {
      if (counts[static_cast<size_t>(c)] < best_cnt) {
        best_cnt = counts[static_cast<size_t>(c)];
        pick = c;
        ties = 1;
      } else if (counts[static_cast<size_t>(c)] == best_cnt) {
        ++ties;
        if (rng.next_below(ties) == 0) pick = c;
      }
    }
    if (pick != color[static_cast<size_t>(v)]) {
      mono_edges += counts[static_cast<size_t>(pick)] -
                    counts[static_cast<size_t>(color[static_cast<size_t>(v)])];
      color[static_cast<size_t>(v)] = pick;
      ++out.flips;
      if (mono_edges < best_mono) {
        best_mono = mono_edges;
        best_color = color;
      }
    }
  }

  out.best_unsat = static_cast<size_t>(best_mono);
  out.found_model = best_mono == 0;
  out.elapsed_seconds = watch.seconds();

  Assignment a(g.n * k);
  for (int v = 1; v <= g.n; ++v) {
    for (int c = 1; c <= k; ++c) {
      auto var = vm.lookup("x", {v, c});
      if (!var)
        throw std::invalid_argument("coloring search: varmap lacks x(" +
                                    std::to_string(v) + "," + std::to_string(c) + ")");
      a.set(*var, c == best_color[static_cast<size_t>(v)]);
    }
  }
  out.assignment = std::move(a);
  return out;
}

SearchOutcome bddt_level_search(const CnfFormula& f, const Dataset& d,
                                int depth, const VarMap& vm,
                                const SearchParams& p) {
  if (depth < 1) throw std::invalid_argument("bddt search: depth must be >= 1");
  Stopwatch watch;
  Rng rng(p.seed);

  const int first_leaf = 1 << depth;
  const int num_rows = static_cast<int>(d.rows.size());
  const int num_labels = d.num_labels();

  std::vector<std::vector<double>> cuts(static_cast<size_t>(d.feature_count));
  for (int ft = 0; ft < d.feature_count; ++ft) cuts[static_cast<size_t>(ft)] = d.cuts(ft);

  // Variable level: internal a/s vars carry their node's depth, leaf class
  // vars sit on the last level, path vars stay unleveled.
  const int num_levels = depth + 1;
  std::vector<int> level(static_cast<size_t>(f.num_vars()) + 1, -1);
  auto node_level = [](int t) {
    int lvl = 0;
    while (t > 1) {
      t /= 2;
      ++lvl;
    }
    return lvl;
  };
  for (const auto& [tuple, var] : vm.family("a"))
    level[static_cast<size_t>(var)] = node_level(tuple[0]);
  for (const auto& [tuple, var] : vm.family("s"))
    level[static_cast<size_t>(var)] = node_level(tuple[0]);
  for (const auto& entry : vm.family("c")) level[static_cast<size_t>(entry.second)] = depth;

  // Initial tree: random feature and middle cut per internal node.
  std::vector<int> node_feature(static_cast<size_t>(first_leaf), 0);
  std::vector<int> node_cut(static_cast<size_t>(first_leaf), 0);  // 0 = pass-through
  for (int t = 1; t < first_leaf; ++t) {
    const int ft = static_cast<int>(rng.next_below(static_cast<uint64_t>(d.feature_count)));
    const int m = static_cast<int>(cuts[static_cast<size_t>(ft)].size());
    node_feature[static_cast<size_t>(t)] = ft;
    node_cut[static_cast<size_t>(t)] = m == 0 ? 0 : (m + 1) / 2;
  }

  Assignment a(f.num_vars());
  for (Var v = 1; v <= f.num_vars(); ++v) a.set(v, false);
  for (int t = 1; t < first_leaf; ++t) {
    a.set(*vm.lookup("a", {t, node_feature[static_cast<size_t>(t)]}), true);
    a.set(*vm.lookup("s",
                     {t, node_feature[static_cast<size_t>(t)], node_cut[static_cast<size_t>(t)]}),
          true);
  }

  // Route every row, fill path variables, and give each leaf its majority
  // label (empty leaves default to class 0).
  std::vector<std::vector<long>> leaf_counts(
      static_cast<size_t>(first_leaf), std::vector<long>(static_cast<size_t>(num_labels), 0));
  for (int e = 0; e < num_rows; ++e) {
    const auto& row = d.rows[static_cast<size_t>(e)];
    int node = 1;
    a.set(*vm.lookup("p", {e, node}), true);
    while (node < first_leaf) {
      const int ft = node_feature[static_cast<size_t>(node)];
      const int j = node_cut[static_cast<size_t>(node)];
      const bool left = j == 0 || row.features[static_cast<size_t>(ft)] <=
                                      cuts[static_cast<size_t>(ft)][static_cast<size_t>(j) - 1];
      node = left ? 2 * node : 2 * node + 1;
      a.set(*vm.lookup("p", {e, node}), true);
    }
    ++leaf_counts[static_cast<size_t>(node - first_leaf)][static_cast<size_t>(row.label)];
  }
  for (int l = 0; l < first_leaf; ++l) {
    int best_cls = 0;
    for (int cls = 1; cls < num_labels; ++cls)
      if (leaf_counts[static_cast<size_t>(l)][static_cast<size_t>(cls)] >
          leaf_counts[static_cast<size_t>(l)][static_cast<size_t>(best_cls)])
        best_cls = cls;
    a.set(*vm.lookup("c", {l + first_leaf, best_cls}), true);
  }

  SearchState state(f, std::move(a));
  SearchOutcome out;
  out.assignment = state.assignment();
  out.best_unsat = state.unsat_count();

  int current_level = 0;
  long since_improve = 0;
  int empty_levels = 0;
  std::vector<uint32_t> eligible;

  while (true) {
    if (state.unsat_count() == 0) {
      out.found_model = true;
      out.best_unsat = 0;
      out.assignment = state.assignment();
      break;
    }
    if (budget_spent(p, watch, out.flips)) break;

    if (since_improve >= p.stagnation_window) {
      current_level = (current_level + 1) % num_levels;
      since_improve = 0;
    }

    eligible.clear();
    for (uint32_t cl : state.unsat_clauses()) {
      for (Lit l : f.clause(cl)) {
        if (level[static_cast<size_t>(lit_var(l))] == current_level) {
          eligible.push_back(cl);
          break;
        }
      }
    }
    if (eligible.empty()) {
      ++empty_levels;
      if (empty_levels <= num_levels) {
        current_level = (current_level + 1) % num_levels;
        since_improve = 0;
        continue;
      }
      // No unsat clause touches any leveled variable; fall back to the
      // whole unsat list so the walk cannot spin.
      eligible.assign(state.unsat_clauses().begin(), state.unsat_clauses().end());
    }
    empty_levels = 0;

    const uint32_t cl = eligible[rng.next_below(eligible.size())];
    const Var pick = best_in_clause(state, f.clause(cl), rng);
    state.flip(pick);
    ++out.flips;
    if (state.unsat_count() < out.best_unsat) {
      out.best_unsat = state.unsat_count();
      out.assignment = state.assignment();
      since_improve = 0;
    } else {
      ++since_improve;
    }
  }
  out.elapsed_seconds = watch.seconds();
  return out;
}

}  // namespace encls
