#include "schemes.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace encls {

namespace {

const char* kColoringSource = R"PY(from pysat.formula import CNF, IDPool

def encode(instance, k):
    # instance.n items (1-based), instance.pairs: list of unordered (u, v)
    pool = IDPool()
    cnf = CNF()
    x = {}
    for v in range(1, instance.n + 1):
        for c in range(1, k + 1):
            x[(v, c)] = pool.id(("x", v, c))
    for v in range(1, instance.n + 1):
        cnf.append([x[(v, c)] for c in range(1, k + 1)])
    for (u, v) in instance.pairs:
        for c in range(1, k + 1):
            cnf.append([-x[(u, c)], -x[(v, c)]])
    return cnf, x
)PY";

const char* kDfvsSource = R"PY(from pysat.formula import CNF, IDPool
from pysat.card import CardEnc, EncType

def encode(instance, k):
    # instance.n items (1-based), instance.arcs: list of ordered (u, v)
    pool = IDPool()
    cnf = CNF()
    d = {v: pool.id(("del", v)) for v in range(1, instance.n + 1)}
    r = {}
    for u in range(1, instance.n + 1):
        for v in range(1, instance.n + 1):
            if u != v:
                r[(u, v)] = pool.id(("r", u, v))
    for (u, v) in instance.arcs:
        cnf.append([d[u], d[v], r[(u, v)]])
        cnf.append([d[u], d[v], -r[(v, u)]])
    for u in range(1, instance.n + 1):
        for v in range(1, instance.n + 1):
            for w in range(1, instance.n + 1):
                if u != v and v != w and u != w:
                    cnf.append([-r[(u, v)], -r[(v, w)], r[(u, w)]])
    card = CardEnc.atmost([d[v] for v in range(1, instance.n + 1)],
                          bound=k, vpool=pool, encoding=EncType.seqcounter)
    cnf.extend(card.clauses)
    return cnf, (d, r)
)PY";

const char* kBddtSource = R"PY(from pysat.formula import CNF, IDPool

def cuts_for(rows, f):
    vals = sorted(set(row[0][f] for row in rows))
    return [(a + b) / 2 for a, b in zip(vals, vals[1:])]

def encode(rows, num_features, num_labels, k):
    # rows: list of (features, label). Complete binary tree: node t has
    # children 2t and 2t+1, leaves are 2**k .. 2**(k+1) - 1.
    pool = IDPool()
    cnf = CNF()
    first_leaf = 2 ** k
    cuts = {f: cuts_for(rows, f) for f in range(num_features)}
    a = {(t, f): pool.id(("a", t, f))
         for t in range(1, first_leaf) for f in range(num_features)}
    s = {(t, f, j): pool.id(("s", t, f, j))
         for t in range(1, first_leaf) for f in range(num_features)
         for j in range(len(cuts[f]) + 1)}  # j = 0 sends every row left
    c = {(l, y): pool.id(("c", l, y))
         for l in range(first_leaf, 2 * first_leaf) for y in range(num_labels)}
    p = {(e, t): pool.id(("p", e, t))
         for e in range(len(rows)) for t in range(1, 2 * first_leaf)}

    def exactly_one(lits):
        cnf.append(list(lits))
        for i in range(len(lits)):
            for j in range(i + 1, len(lits)):
                cnf.append([-lits[i], -lits[j]])

    for t in range(1, first_leaf):
        exactly_one([a[(t, f)] for f in range(num_features)])
        for f in range(num_features):
            opts = [s[(t, f, j)] for j in range(len(cuts[f]) + 1)]
            cnf.append([-a[(t, f)]] + opts)
            for j in range(len(opts)):
                cnf.append([-opts[j], a[(t, f)]])
                for j2 in range(j + 1, len(opts)):
                    cnf.append([-opts[j], -opts[j2]])
    for l in range(first_leaf, 2 * first_leaf):
        exactly_one([c[(l, y)] for y in range(num_labels)])
    for e, (features, label) in enumerate(rows):
        cnf.append([p[(e, 1)]])
        for t in range(2, 2 * first_leaf):
            cnf.append([-p[(e, t)], p[(e, t // 2)]])
        for t in range(1, first_leaf):
            for f in range(num_features):
                for j in range(len(cuts[f]) + 1):
                    left = j == 0 or features[f] <= cuts[f][j - 1]
                    taken, other = (2 * t, 2 * t + 1) if left else (2 * t + 1, 2 * t)
                    cnf.append([-p[(e, t)], -s[(t, f, j)], p[(e, taken)]])
                    cnf.append([-p[(e, t)], -s[(t, f, j)], -p[(e, other)]])
        for l in range(first_leaf, 2 * first_leaf):
            cnf.append([-p[(e, l)], c[(l, label)]])
    return cnf, (a, s, c, p)
)PY";

std::string lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

EncodingScheme make_coloring_scheme() {
  EncodingScheme sch;
  sch.name = "coloring";
  sch.instance_kind = "graph";
  sch.bound_name = "k";
  sch.source_text = kColoringSource;
  sch.deny_terms = {"coloring", "chromatic", "graph color"};
  sch.default_bound = [](const std::string& text) {
    return static_cast<long>(dsatur_upper_bound(parse_graph(text)));
  };
  sch.encode = [](const std::string& text, long bound) {
    return encode_coloring(parse_graph(text), static_cast<int>(bound));
  };
  sch.decode = [](const std::string& text, long bound, const Assignment& model,
                  const VarMap& vm) {
    const Graph g = parse_graph(text);
    const std::vector<int> color = decode_coloring(model, vm);
    for (const auto& [u, v] : g.edges) {
      if (color[static_cast<size_t>(u)] == color[static_cast<size_t>(v)])
        throw DecodeError("edge " + std::to_string(u) + "-" + std::to_string(v) +
                          " is monochromatic");
    }
    std::ostringstream out;
    out << "proper coloring with k=" << bound << ":";
    for (int v = 1; v <= g.n; ++v) out << " " << v << "=" << color[static_cast<size_t>(v)];
    return out.str();
  };
  sch.native_search = [](const std::string& text, long bound, const CnfFormula&,
                         const VarMap& vm, const SearchParams& p) {
    return coloring_native_search(parse_graph(text), static_cast<int>(bound), p, vm);
  };
  return sch;
}

EncodingScheme make_dfvs_scheme() {
  EncodingScheme sch;
  sch.name = "dfvs";
  sch.instance_kind = "digraph";
  sch.bound_name = "k";
  sch.source_text = kDfvsSource;
  sch.deny_terms = {"feedback vertex", "feedback set", "dfvs"};
  sch.default_bound = [](const std::string& text) {
    return static_cast<long>(greedy_fvs_upper_bound(parse_digraph(text)));
  };
  sch.encode = [](const std::string& text, long bound) {
    return encode_dfvs(parse_digraph(text), static_cast<int>(bound));
  };
  sch.decode = [](const std::string& text, long bound, const Assignment& model,
                  const VarMap& vm) {
    const Digraph g = parse_digraph(text);
    const std::vector<int> deleted = decode_dfvs(model, vm);
    if (static_cast<long>(deleted.size()) > bound)
      throw DecodeError("deleted set exceeds the budget");
    std::vector<char> removed(static_cast<size_t>(g.n) + 1, 0);
    for (int v : deleted) removed[static_cast<size_t>(v)] = 1;
    if (!g.is_acyclic(removed)) throw DecodeError("residual graph still has a cycle");
    std::ostringstream out;
    out << "feedback vertex set of size " << deleted.size() << " <= " << bound << ":";
    for (int v : deleted) out << " " << v;
    return out.str();
  };
  return sch;
}

EncodingScheme make_bddt_scheme() {
  EncodingScheme sch;
  sch.name = "bddt";
  sch.instance_kind = "dataset";
  sch.bound_name = "depth";
  sch.source_text = kBddtSource;
  sch.deny_terms = {"decision tree", "classifier", "classification"};
  sch.default_bound = [](const std::string& text) {
    return static_cast<long>(greedy_tree_depth_upper_bound(parse_dataset(text)));
  };
  sch.encode = [](const std::string& text, long bound) {
    return encode_bddt(parse_dataset(text), static_cast<int>(bound));
  };
  sch.decode = [](const std::string& text, long bound, const Assignment& model,
                  const VarMap& vm) {
    const Dataset d = parse_dataset(text);
    const DecisionTree tree = decode_bddt(model, vm, d);
    for (const auto& row : d.rows) {
      if (tree.classify(row.features) != row.label)
        throw DecodeError("tree misclassifies a row");
    }
    std::ostringstream out;
    out << "exact tree of depth " << bound << " classifying all " << d.rows.size()
        << " rows";
    return out.str();
  };
  sch.native_search = [](const std::string& text, long bound, const CnfFormula& f,
                         const VarMap& vm, const SearchParams& p) {
    return bddt_level_search(f, parse_dataset(text), static_cast<int>(bound), vm, p);
  };
  return sch;
}

const std::vector<EncodingScheme>& all_schemes() {
  static const std::vector<EncodingScheme> schemes = {
      make_coloring_scheme(), make_dfvs_scheme(), make_bddt_scheme()};
  return schemes;
}

}  // namespace

const EncodingScheme& get_scheme(const std::string& name) {
  for (const auto& sch : all_schemes())
    if (sch.name == name) return sch;
  throw std::invalid_argument("unknown scheme: " + name);
}

std::vector<std::string> scheme_names() {
  std::vector<std::string> names;
  for (const auto& sch : all_schemes()) names.push_back(sch.name);
  return names;
}

std::vector<std::string> scan_deny_terms(const EncodingScheme& scheme,
                                         const std::string& text) {
  const std::string hay = lowercase(text);
  std::vector<std::string> hits;
  for (const auto& term : scheme.deny_terms)
    if (hay.find(lowercase(term)) != std::string::npos) hits.push_back(term);
  return hits;
}

}  // namespace encls
