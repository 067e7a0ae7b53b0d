#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace oracle {

using encls::Assignment;
using encls::CnfFormula;
using encls::Dataset;
using encls::Digraph;
using encls::Graph;
using encls::Lit;
using encls::Rng;
using encls::Var;

bool colorable(const Graph& g, int k) {
  if (g.n == 0) return true;
  if (k <= 0) return g.edges.empty() && g.n == 0;
  std::vector<int> color(g.n + 1, 0);
  long long total = 1;
  for (int v = 0; v < g.n; ++v) total *= k;
  for (long long code = 0; code < total; ++code) {
    long long c = code;
    for (int v = 1; v <= g.n; ++v) {
      color[v] = static_cast<int>(c % k);
      c /= k;
    }
    bool proper = true;
    for (auto [u, v] : g.edges) {
      if (color[u] == color[v]) {
        proper = false;
        break;
      }
    }
    if (proper) return true;
  }
  return false;
}

int min_fvs(const Digraph& g) {
  int best = g.n;
  for (unsigned mask = 0; mask < (1u << g.n); ++mask) {
    int size = __builtin_popcount(mask);
    if (size >= best) continue;
    std::vector<char> removed(g.n + 1, 0);
    for (int v = 1; v <= g.n; ++v)
      if (mask & (1u << (v - 1))) removed[v] = 1;
    if (g.is_acyclic(removed)) best = size;
  }
  return best;
}

namespace {

bool tree_exists_rec(const Dataset& d, const std::vector<int>& rows, int depth) {
  if (rows.empty()) return true;
  int label = d.rows[rows[0]].label;
  bool uniform = true;
  for (int r : rows)
    if (d.rows[r].label != label) {
      uniform = false;
      break;
    }
  if (uniform) return true;
  if (depth == 0) return false;
  for (int f = 0; f < d.feature_count; ++f) {
    for (double cut : d.cuts(f)) {
      std::vector<int> left, right;
      for (int r : rows) {
        if (d.rows[r].features[f] <= cut)
          left.push_back(r);
        else
          right.push_back(r);
      }
      if (left.empty() || right.empty()) continue;
      if (tree_exists_rec(d, left, depth - 1) &&
          tree_exists_rec(d, right, depth - 1))
        return true;
    }
  }
  return false;
}

}  // namespace

bool tree_exists(const Dataset& d, int depth) {
  std::vector<int> rows(d.rows.size());
  for (size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  return tree_exists_rec(d, rows, depth);
}

int count_unsat(const CnfFormula& f, const Assignment& a) {
  int unsat = 0;
  for (size_t i = 0; i < f.num_clauses(); ++i) {
    bool sat = false;
    for (Lit lit : f.clause(i)) {
      int v = std::abs(lit);
      if (a.is_assigned(v) && a.value(v) == (lit > 0)) {
        sat = true;
        break;
      }
    }
    if (!sat) ++unsat;
  }
  return unsat;
}

namespace {

Assignment assignment_from_mask(int n, unsigned long long mask) {
  Assignment a(n);
  for (int v = 1; v <= n; ++v) a.set(v, (mask >> (v - 1)) & 1ull);
  return a;
}

}  // namespace

bool satisfiable(const CnfFormula& f) {
  int n = f.num_vars();
  if (n > 24) throw std::invalid_argument("oracle::satisfiable: formula too large");
  for (unsigned long long mask = 0; mask < (1ull << n); ++mask) {
    if (oracle::count_unsat(f, assignment_from_mask(n, mask)) == 0) return true;
  }
  return false;
}

std::vector<Assignment> all_models(const CnfFormula& f) {
  int n = f.num_vars();
  if (n > 22) throw std::invalid_argument("oracle::all_models: formula too large");
  std::vector<Assignment> models;
  for (unsigned long long mask = 0; mask < (1ull << n); ++mask) {
    Assignment a = assignment_from_mask(n, mask);
    if (oracle::count_unsat(f, a) == 0) models.push_back(std::move(a));
  }
  return models;
}

Graph random_graph(Rng& rng, int max_n, double edge_prob) {
  Graph g;
  g.n = 2 + static_cast<int>(rng.next_below(static_cast<uint64_t>(max_n - 1)));
  for (int u = 1; u <= g.n; ++u)
    for (int v = u + 1; v <= g.n; ++v)
      if (rng.next_double() < edge_prob) g.add_edge(u, v);
  return g;
}

Digraph random_digraph(Rng& rng, int max_n, double arc_prob) {
  Digraph g;
  g.n = 2 + static_cast<int>(rng.next_below(static_cast<uint64_t>(max_n - 1)));
  for (int u = 1; u <= g.n; ++u)
    for (int v = 1; v <= g.n; ++v)
      if (u != v && rng.next_double() < arc_prob) g.add_arc(u, v);
  return g;
}

Dataset random_dataset(Rng& rng, int max_rows, int max_features, int max_labels) {
  Dataset d;
  d.feature_count = 1 + static_cast<int>(rng.next_below(max_features));
  int labels = 2 + static_cast<int>(rng.next_below(std::max(1, max_labels - 1)));
  for (int l = 0; l < labels; ++l) d.label_names.push_back(std::string(1, char('A' + l)));
  int rows = 2 + static_cast<int>(rng.next_below(std::max(1, max_rows - 1)));
  std::map<std::vector<double>, int> seen;
  for (int r = 0; r < rows; ++r) {
    Dataset::Row row;
    for (int f = 0; f < d.feature_count; ++f)
      row.features.push_back(static_cast<double>(rng.next_below(10)));
    row.label = static_cast<int>(rng.next_below(labels));
    auto it = seen.find(row.features);
    if (it != seen.end())
      row.label = it->second;
    else
      seen.emplace(row.features, row.label);
    d.rows.push_back(std::move(row));
  }
  return d;
}

CnfFormula random_formula(Rng& rng, int max_vars, int max_clauses) {
  int n = 1 + static_cast<int>(rng.next_below(max_vars));
  int m = static_cast<int>(rng.next_below(max_clauses + 1));
  CnfFormula f(n);
  std::vector<Lit> clause;
  for (int c = 0; c < m; ++c) {
    int len = 1 + static_cast<int>(rng.next_below(4));
    clause.clear();
    for (int j = 0; j < len; ++j) {
      int v = 1 + static_cast<int>(rng.next_below(n));
      clause.push_back(rng.next_bool() ? v : -v);
    }
    f.add_clause(clause);
  }
  return f;
}

Assignment random_total_assignment(Rng& rng, int num_vars) {
  Assignment a(num_vars);
  for (int v = 1; v <= num_vars; ++v) a.set(v, rng.next_bool());
  return a;
}

std::pair<CnfFormula, Assignment> planted_3cnf(Rng& rng, int n, double ratio) {
  Assignment plant = random_total_assignment(rng, n);
  int m = static_cast<int>(std::lround(ratio * n));
  CnfFormula f(n);
  for (int c = 0; c < m; ++c) {
    int vars[3];
    vars[0] = 1 + static_cast<int>(rng.next_below(n));
    do {
      vars[1] = 1 + static_cast<int>(rng.next_below(n));
    } while (vars[1] == vars[0]);
    do {
      vars[2] = 1 + static_cast<int>(rng.next_below(n));
    } while (vars[2] == vars[0] || vars[2] == vars[1]);
    Lit lits[3];
    bool sat = false;
    for (int j = 0; j < 3; ++j) {
      bool positive = rng.next_bool();
      lits[j] = positive ? vars[j] : -vars[j];
      if (plant.value(vars[j]) == positive) sat = true;
    }
    if (!sat) {
      int j = static_cast<int>(rng.next_below(3));
      lits[j] = -lits[j];
    }
    f.add_clause({lits[0], lits[1], lits[2]});
  }
  return {std::move(f), std::move(plant)};
}

std::pair<CnfFormula, Assignment> unique_planted_3cnf(Rng& rng, int n,
                                                      double ratio) {
  for (;;) {
    auto [f, plant] = planted_3cnf(rng, n, ratio);
    if (all_models(f).size() == 1) return {std::move(f), std::move(plant)};
  }
}

std::vector<Var> sample_vars(Rng& rng, int n, int k) {
  std::vector<Var> vars;
  for (Var v = 1; v <= n; ++v) vars.push_back(v);
  for (int i = 0; i < k; ++i) {
    size_t j = i + rng.next_below(vars.size() - i);
    std::swap(vars[i], vars[j]);
  }
  vars.resize(k);
  return vars;
}

std::string graph_text(const Graph& g) {
  std::ostringstream out;
  out << "p " << g.n << " " << g.edges.size() << " u\n";
  for (auto [u, v] : g.edges) out << u << " " << v << "\n";
  return out.str();
}

std::string digraph_text(const Digraph& g) {
  std::ostringstream out;
  out << "p " << g.n << " " << g.arcs.size() << " d\n";
  for (auto [u, v] : g.arcs) out << u << " " << v << "\n";
  return out.str();
}

std::string dataset_csv(const Dataset& d) {
  std::ostringstream out;
  for (const auto& row : d.rows) {
    for (double x : row.features) out << x << ",";
    out << d.label_names[row.label] << "\n";
  }
  return out.str();
}

}  // namespace oracle
