#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cnf.hpp"
#include "instances.hpp"
#include "varmap.hpp"

namespace encls {

struct EncodeResult {
  CnfFormula formula;
  VarMap varmap;
};

struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Proper k-coloring test: x(v,c) selects a color per vertex. One
// at-least-one-color clause per vertex plus one conflict clause per edge and
// color, n + k*|E| clauses total. At-most-one-color is deliberately omitted;
// decoding takes the lowest true color.
EncodeResult encode_coloring(const Graph& g, int k);

// vertex -> color (1-based, index 0 unused). Throws DecodeError when some
// vertex has no true color variable (i.e. the input is not a model).
std::vector<int> decode_coloring(const Assignment& model, const VarMap& vm);

// Feedback vertex set of size <= k via reachability: del(v) marks deleted
// vertices, r(u,v) covers reachability among the survivors. Every arc with
// both endpoints alive implies r; r is transitively closed over all ordered
// vertex triples (the O(n^3) part); an alive arc (u,v) together with r(v,u)
// would close a cycle and is forbidden. del(v)=true means deleted, recorded
// in the varmap metadata.
EncodeResult encode_dfvs(const Digraph& g, int k);

std::vector<int> decode_dfvs(const Assignment& model, const VarMap& vm);

// Sequential-counter at-most-k over arbitrary literals. Auxiliary registers
// start at next_free_var; a total assignment of the inputs extends to a
// model iff at most k of them are true.
struct AtMostK {
  std::vector<std::vector<Lit>> clauses;
  int num_aux = 0;
  std::vector<std::pair<std::vector<int>, Var>> aux;  // (i,j) register -> var
};
AtMostK encode_atmost_k(std::span<const Lit> lits, int k, Var next_free_var);

// Exact decision tree of depth <= k as a complete binary tree in heap order
// (node t has children 2t, 2t+1; leaves are 2^k..2^(k+1)-1). Families:
//   a(t,f)    node t tests feature f            (exactly one f per node)
//   s(t,f,j)  threshold pick: j=0 is the pass-through (everything routes
//             left), j>=1 the j-th midpoint cut  (exactly one j given a(t,f))
//   c(l,cls)  leaf class                         (exactly one per leaf)
//   p(e,node) example e reaches the node; routing clauses pin p to the
//             unique root-to-leaf path, and reached leaves must carry the
//             example's label.
EncodeResult encode_bddt(const Dataset& d, int depth);

struct DecisionTree {
  int depth = 0;
  struct Split {
    int feature = 0;
    double threshold = std::numeric_limits<double>::infinity();  // inf = pass-through
  };
  std::vector<Split> internal;  // heap order, [1 .. 2^depth - 1]; [0] unused
  std::vector<int> leaf_class;  // leaf l at index l - 2^depth

  int classify(std::span<const double> features) const;
};

DecisionTree decode_bddt(const Assignment& model, const VarMap& vm, const Dataset& d);

// Depth reached by a greedy exact tree (best error-reducing midpoint split,
// recursively); cheap upper bound for the bddt scheme.
int greedy_tree_depth_upper_bound(const Dataset& d);

}  // namespace encls
