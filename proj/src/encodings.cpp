#include "encodings.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace encls {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

EncodeResult encode_coloring(const Graph& g, int k) {
  require(g.n >= 1, "coloring: graph has no vertices");
  require(k >= 1, "coloring: color bound must be >= 1");

  EncodeResult out;
  auto& f = out.formula;
  auto& vm = out.varmap;

  // x(v,c) = (v-1)*k + c, allocated in (v,c) row-major order.
  for (int v = 1; v <= g.n; ++v)
    for (int c = 1; c <= k; ++c) vm.fresh("x", {v, c});
  f.set_num_vars(vm.num_vars());

  std::vector<Lit> clause;
  for (int v = 1; v <= g.n; ++v) {
    clause.clear();
    for (int c = 1; c <= k; ++c) clause.push_back(*vm.lookup("x", {v, c}));
    f.add_clause(clause);
  }
  for (const auto& [u, v] : g.edges) {
    for (int c = 1; c <= k; ++c) {
      f.add_clause({-*vm.lookup("x", {u, c}), -*vm.lookup("x", {v, c})});
    }
  }

  vm.set_meta("n", g.n);
  vm.set_meta("k", k);
  return out;
}

std::vector<int> decode_coloring(const Assignment& model, const VarMap& vm) {
  auto n = vm.meta("n");
  auto k = vm.meta("k");
  if (!n || !k) throw DecodeError("coloring decode: varmap lacks n/k metadata");

  std::vector<int> color(static_cast<size_t>(*n) + 1, 0);
  for (int v = 1; v <= *n; ++v) {
    for (int c = 1; c <= *k; ++c) {
      Var x = *vm.lookup("x", {v, c});
      if (auto val = model.get(x); val && *val) {
        color[v] = c;
        break;
      }
    }
    if (color[v] == 0) {
      throw DecodeError("coloring decode: vertex " + std::to_string(v) +
                        " has no color set");
    }
  }
  return color;
}

AtMostK encode_atmost_k(std::span<const Lit> lits, int k, Var next_free_var) {
  require(k >= 0, "atmost: bound must be >= 0");
  require(next_free_var >= 1, "atmost: next_free_var must be >= 1");
  for (Lit l : lits) {
    require(l != 0 && lit_var(l) < next_free_var,
            "atmost: literal overlaps the auxiliary range");
  }

  AtMostK out;
  const int n = static_cast<int>(lits.size());
  if (k >= n) return out;

  if (k == 0) {
    for (Lit l : lits) out.clauses.push_back({-l});
    return out;
  }

  // Sinz sequential counter: s(i,j) holds when at least j of the first i
  // inputs are true, for i in 1..n-1 and j in 1..k.
  auto s = [&](int i, int j) -> Lit {
    return next_free_var + (i - 1) * k + (j - 1);
  };
  out.num_aux = (n - 1) * k;
  for (int i = 1; i <= n - 1; ++i)
    for (int j = 1; j <= k; ++j) out.aux.push_back({{i, j}, s(i, j)});

  auto x = [&](int i) { return lits[static_cast<size_t>(i) - 1]; };

  out.clauses.push_back({-x(1), s(1, 1)});
  for (int j = 2; j <= k; ++j) out.clauses.push_back({-s(1, j)});
  for (int i = 2; i <= n - 1; ++i) {
    out.clauses.push_back({-x(i), s(i, 1)});
    out.clauses.push_back({-s(i - 1, 1), s(i, 1)});
    for (int j = 2; j <= k; ++j) {
      out.clauses.push_back({-x(i), -s(i - 1, j - 1), s(i, j)});
      out.clauses.push_back({-s(i - 1, j), s(i, j)});
    }
    out.clauses.push_back({-x(i), -s(i - 1, k)});
  }
  out.clauses.push_back({-x(n), -s(n - 1, k)});
  return out;
}

EncodeResult encode_dfvs(const Digraph& g, int k) {
  require(g.n >= 1, "dfvs: graph has no vertices");
  require(k >= 0, "dfvs: deletion bound must be >= 0");

  EncodeResult out;
  auto& f = out.formula;
  auto& vm = out.varmap;

  for (int v = 1; v <= g.n; ++v) vm.fresh("del", {v});
  for (int u = 1; u <= g.n; ++u)
    for (int v = 1; v <= g.n; ++v)
      if (u != v) vm.fresh("r", {u, v});
  f.set_num_vars(vm.num_vars());

  auto del = [&](int v) { return *vm.lookup("del", {v}); };
  auto r = [&](int u, int v) { return *vm.lookup("r", {u, v}); };

  for (const auto& [u, v] : g.arcs) {
    f.add_clause({del(u), del(v), r(u, v)});
    f.add_clause({del(u), del(v), -r(v, u)});
  }
  for (int u = 1; u <= g.n; ++u)
    for (int v = 1; v <= g.n; ++v) {
      if (v == u) continue;
      for (int w = 1; w <= g.n; ++w) {
        if (w == u || w == v) continue;
        f.add_clause({-r(u, v), -r(v, w), r(u, w)});
      }
    }

  std::vector<Lit> dels;
  for (int v = 1; v <= g.n; ++v) dels.push_back(del(v));
  AtMostK card = encode_atmost_k(dels, k, vm.num_vars() + 1);
  for (const auto& [tuple, var] : card.aux) vm.add("aux", tuple, var);
  f.set_num_vars(vm.num_vars());
  for (const auto& cl : card.clauses) f.add_clause(cl);

  vm.set_meta("n", g.n);
  vm.set_meta("k", k);
  vm.set_meta("del_true_means_deleted", 1);
  return out;
}

std::vector<int> decode_dfvs(const Assignment& model, const VarMap& vm) {
  auto n = vm.meta("n");
  if (!n) throw DecodeError("dfvs decode: varmap lacks n metadata");
  std::vector<int> deleted;
  for (int v = 1; v <= *n; ++v) {
    Var d = *vm.lookup("del", {v});
    if (auto val = model.get(d); val && *val) deleted.push_back(v);
  }
  return deleted;
}

namespace {

void add_exactly_one(CnfFormula& f, const std::vector<Lit>& lits) {
  f.add_clause(lits);
  for (size_t i = 0; i < lits.size(); ++i)
    for (size_t j = i + 1; j < lits.size(); ++j)
      f.add_clause({-lits[i], -lits[j]});
}

}  // namespace

EncodeResult encode_bddt(const Dataset& d, int depth) {
  require(depth >= 1, "bddt: depth must be >= 1");
  require(!d.rows.empty(), "bddt: dataset has no rows");
  require(depth <= 20, "bddt: depth too large to build a complete tree");
  for (size_t a = 0; a < d.rows.size(); ++a)
    for (size_t b = a + 1; b < d.rows.size(); ++b)
      require(d.rows[a].features != d.rows[b].features ||
                  d.rows[a].label == d.rows[b].label,
              "bddt: contradictory duplicate rows");

  const int num_features = d.feature_count;
  const int num_labels = d.num_labels();
  const int first_leaf = 1 << depth;
  const int num_nodes = (1 << (depth + 1)) - 1;
  const int num_rows = static_cast<int>(d.rows.size());

  std::vector<std::vector<double>> cuts(static_cast<size_t>(num_features));
  for (int f = 0; f < num_features; ++f) cuts[static_cast<size_t>(f)] = d.cuts(f);

  EncodeResult out;
  auto& formula = out.formula;
  auto& vm = out.varmap;

  for (int t = 1; t < first_leaf; ++t)
    for (int f = 0; f < num_features; ++f) vm.fresh("a", {t, f});
  for (int t = 1; t < first_leaf; ++t)
    for (int f = 0; f < num_features; ++f)
      for (int j = 0; j <= static_cast<int>(cuts[static_cast<size_t>(f)].size()); ++j)
        vm.fresh("s", {t, f, j});
  for (int l = first_leaf; l <= num_nodes; ++l)
    for (int cls = 0; cls < num_labels; ++cls) vm.fresh("c", {l, cls});
  for (int e = 0; e < num_rows; ++e)
    for (int node = 1; node <= num_nodes; ++node) vm.fresh("p", {e, node});
  formula.set_num_vars(vm.num_vars());

  auto a = [&](int t, int f) { return *vm.lookup("a", {t, f}); };
  auto s = [&](int t, int f, int j) { return *vm.lookup("s", {t, f, j}); };
  auto c = [&](int l, int cls) { return *vm.lookup("c", {l, cls}); };
  auto p = [&](int e, int node) { return *vm.lookup("p", {e, node}); };

  std::vector<Lit> lits;
  for (int t = 1; t < first_leaf; ++t) {
    lits.clear();
    for (int f = 0; f < num_features; ++f) lits.push_back(a(t, f));
    add_exactly_one(formula, lits);
    for (int f = 0; f < num_features; ++f) {
      const int num_j = static_cast<int>(cuts[static_cast<size_t>(f)].size()) + 1;
      lits.clear();
      lits.push_back(-a(t, f));
      for (int j = 0; j < num_j; ++j) lits.push_back(s(t, f, j));
      formula.add_clause(lits);
      for (int j = 0; j < num_j; ++j) {
        formula.add_clause({-s(t, f, j), a(t, f)});
        for (int j2 = j + 1; j2 < num_j; ++j2)
          formula.add_clause({-s(t, f, j), -s(t, f, j2)});
      }
    }
  }

  for (int l = first_leaf; l <= num_nodes; ++l) {
    lits.clear();
    for (int cls = 0; cls < num_labels; ++cls) lits.push_back(c(l, cls));
    add_exactly_one(formula, lits);
  }

  for (int e = 0; e < num_rows; ++e) {
    const auto& row = d.rows[static_cast<size_t>(e)];
    formula.add_clause({p(e, 1)});
    for (int node = 2; node <= num_nodes; ++node)
      formula.add_clause({-p(e, node), p(e, node / 2)});
    for (int t = 1; t < first_leaf; ++t) {
      for (int f = 0; f < num_features; ++f) {
        const auto& fc = cuts[static_cast<size_t>(f)];
        for (int j = 0; j <= static_cast<int>(fc.size()); ++j) {
          const bool left =
              j == 0 || row.features[static_cast<size_t>(f)] <= fc[static_cast<size_t>(j) - 1];
          const int taken = left ? 2 * t : 2 * t + 1;
          const int other = left ? 2 * t + 1 : 2 * t;
          formula.add_clause({-p(e, t), -s(t, f, j), p(e, taken)});
          formula.add_clause({-p(e, t), -s(t, f, j), -p(e, other)});
        }
      }
    }
    for (int l = first_leaf; l <= num_nodes; ++l)
      formula.add_clause({-p(e, l), c(l, row.label)});
  }

  vm.set_meta("depth", depth);
  vm.set_meta("num_features", num_features);
  vm.set_meta("num_labels", num_labels);
  vm.set_meta("num_rows", num_rows);
  return out;
}

int DecisionTree::classify(std::span<const double> features) const {
  int node = 1;
  for (int level = 0; level < depth; ++level) {
    const Split& sp = internal[static_cast<size_t>(node)];
    const bool left = !(features[static_cast<size_t>(sp.feature)] > sp.threshold);
    node = left ? 2 * node : 2 * node + 1;
  }
  return leaf_class[static_cast<size_t>(node - (1 << depth))];
}

DecisionTree decode_bddt(const Assignment& model, const VarMap& vm, const Dataset& d) {
  auto depth = vm.meta("depth");
  auto num_labels = vm.meta("num_labels");
  if (!depth || !num_labels) throw DecodeError("bddt decode: varmap lacks metadata");

  DecisionTree tree;
  tree.depth = static_cast<int>(*depth);
  const int first_leaf = 1 << tree.depth;
  tree.internal.resize(static_cast<size_t>(first_leaf));
  tree.leaf_class.assign(static_cast<size_t>(first_leaf), -1);

  auto truthy = [&](Var v) {
    auto val = model.get(v);
    return val && *val;
  };

  for (int t = 1; t < first_leaf; ++t) {
    bool found = false;
    for (int f = 0; f < d.feature_count && !found; ++f) {
      auto av = vm.lookup("a", {t, f});
      if (!av || !truthy(*av)) continue;
      const auto fc = d.cuts(f);
      for (int j = 0; j <= static_cast<int>(fc.size()); ++j) {
        auto sv = vm.lookup("s", {t, f, j});
        if (!sv || !truthy(*sv)) continue;
        tree.internal[static_cast<size_t>(t)].feature = f;
        tree.internal[static_cast<size_t>(t)].threshold =
            j == 0 ? std::numeric_limits<double>::infinity()
                   : fc[static_cast<size_t>(j) - 1];
        found = true;
        break;
      }
    }
    if (!found)
      throw DecodeError("bddt decode: node " + std::to_string(t) + " has no split set");
  }
  for (int l = first_leaf; l < 2 * first_leaf; ++l) {
    for (int cls = 0; cls < *num_labels; ++cls) {
      auto cv = vm.lookup("c", {l, cls});
      if (cv && truthy(*cv)) {
        tree.leaf_class[static_cast<size_t>(l - first_leaf)] = cls;
        break;
      }
    }
    if (tree.leaf_class[static_cast<size_t>(l - first_leaf)] < 0)
      throw DecodeError("bddt decode: leaf " + std::to_string(l) + " has no class set");
  }
  return tree;
}

namespace {

int greedy_tree_depth(const Dataset& d, std::vector<int>& rows) {
  bool pure = true;
  for (size_t i = 1; i < rows.size(); ++i) {
    if (d.rows[static_cast<size_t>(rows[i])].label !=
        d.rows[static_cast<size_t>(rows[0])].label) {
      pure = false;
      break;
    }
  }
  if (pure) return 0;

  // Pick the midpoint split with the fewest minority rows across both sides,
  // requiring both sides nonempty so recursion always shrinks.
  int best_feature = -1;
  double best_threshold = 0.0;
  long best_cost = std::numeric_limits<long>::max();
  for (int f = 0; f < d.feature_count; ++f) {
    std::vector<double> vals;
    vals.reserve(rows.size());
    for (int e : rows) vals.push_back(d.rows[static_cast<size_t>(e)].features[static_cast<size_t>(f)]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (size_t i = 0; i + 1 < vals.size(); ++i) {
      const double cut = (vals[i] + vals[i + 1]) / 2.0;
      std::map<int, long> left_count, right_count;
      long left_total = 0, right_total = 0;
      for (int e : rows) {
        const auto& row = d.rows[static_cast<size_t>(e)];
        if (row.features[static_cast<size_t>(f)] <= cut) {
          ++left_count[row.label];
          ++left_total;
        } else {
          ++right_count[row.label];
          ++right_total;
        }
      }
      if (left_total == 0 || right_total == 0) continue;
      long majority = 0;
      for (const auto& [cls, cnt] : left_count) majority = std::max(majority, cnt);
      long cost = left_total - majority;
      majority = 0;
      for (const auto& [cls, cnt] : right_count) majority = std::max(majority, cnt);
      cost += right_total - majority;
      if (cost < best_cost) {
        best_cost = cost;
        best_feature = f;
        best_threshold = cut;
      }
    }
  }
  if (best_feature < 0)
    throw std::invalid_argument("bddt bound: rows are inseparable (contradictory data)");

  std::vector<int> left, right;
  for (int e : rows) {
    if (d.rows[static_cast<size_t>(e)].features[static_cast<size_t>(best_feature)] <=
        best_threshold)
      left.push_back(e);
    else
      right.push_back(e);
  }
  return 1 + std::max(greedy_tree_depth(d, left), greedy_tree_depth(d, right));
}

}  // namespace

int greedy_tree_depth_upper_bound(const Dataset& d) {
  require(!d.rows.empty(), "bddt bound: dataset has no rows");
  std::vector<int> rows(d.rows.size());
  for (size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  int depth = greedy_tree_depth(d, rows);
  return std::max(depth, 1);
}

}  // namespace encls
