#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace encls {

struct InstanceError : std::runtime_error {
  InstanceError(int line_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
  int line;
};

// Undirected graph, 1-based vertices, no self-loops or duplicate edges.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // stored with first < second

  void add_edge(int u, int v);
  bool has_edge(int u, int v) const;
  std::vector<int> degrees() const;
};

// Directed graph, 1-based vertices, no self-loops.
struct Digraph {
  int n = 0;
  std::vector<std::pair<int, int>> arcs;

  void add_arc(int u, int v);
  // DFS cycle check over the vertices not in `removed` (indexed 1..n).
  bool is_acyclic(const std::vector<char>& removed = {}) const;
};

// Labeled dataset with numeric features; labels are dense ids from 0 in
// first-appearance order of the label strings.
struct Dataset {
  struct Row {
    std::vector<double> features;
    int label = 0;
  };
  std::vector<Row> rows;
  int feature_count = 0;
  std::vector<std::string> label_names;

  int num_labels() const { return static_cast<int>(label_names.size()); }
  // Midpoints between consecutive distinct sorted values of one feature.
  std::vector<double> cuts(int feature) const;
};

// Graph/digraph input: "p <n> <m> <u|d>" then m lines "u v".
Graph parse_graph(std::string_view text);
Digraph parse_digraph(std::string_view text);
// CSV, numeric feature columns, final column is the label.
Dataset parse_dataset(std::string_view text);

// Color count of a DSATUR coloring (saturation-first, ties by degree then
// index). The coloring itself is proper; the bound need not be tight.
int dsatur_upper_bound(const Graph& g);

// Size of a feedback vertex set found by repeatedly deleting a maximum
// degree vertex on some remaining cycle.
int greedy_fvs_upper_bound(const Digraph& g);

}  // namespace encls
