#include "instances.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace encls {

void Graph::add_edge(int u, int v) {
  if (u == v) throw InstanceError(0, "self-loop at vertex " + std::to_string(u));
  if (u > v) std::swap(u, v);
  if (has_edge(u, v)) throw InstanceError(0, "duplicate edge");
  edges.emplace_back(u, v);
}

bool Graph::has_edge(int u, int v) const {
  if (u > v) std::swap(u, v);
  return std::find(edges.begin(), edges.end(), std::make_pair(u, v)) != edges.end();
}

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(n + 1, 0);
  for (auto [u, v] : edges) {
    deg[u]++;
    deg[v]++;
  }
  return deg;
}

void Digraph::add_arc(int u, int v) {
  if (u == v)
    throw InstanceError(0, "self-loop at vertex " + std::to_string(u) +
                               " (the vertex is in every feedback set; not supported)");
  arcs.emplace_back(u, v);
}

bool Digraph::is_acyclic(const std::vector<char>& removed) const {
  std::vector<std::vector<int>> out(n + 1);
  auto alive = [&](int v) { return removed.empty() || !removed[v]; };
  for (auto [u, v] : arcs)
    if (alive(u) && alive(v)) out[u].push_back(v);
  // iterative DFS with white/grey/black coloring
  std::vector<int8_t> state(n + 1, 0);
  std::vector<std::pair<int, size_t>> stack;
  for (int s = 1; s <= n; ++s) {
    if (state[s] != 0 || !alive(s)) continue;
    stack.emplace_back(s, 0);
    state[s] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < out[v].size()) {
        int w = out[v][next++];
        if (state[w] == 1) return false;
        if (state[w] == 0) {
          state[w] = 1;
          stack.emplace_back(w, 0);
        }
      } else {
        state[v] = 2;
        stack.pop_back();
      }
    }
  }
  return true;
}

std::vector<double> Dataset::cuts(int feature) const {
  std::vector<double> values;
  values.reserve(rows.size());
  for (const auto& row : rows) values.push_back(row.features[feature]);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> out;
  for (size_t i = 0; i + 1 < values.size(); ++i)
    out.push_back((values[i] + values[i + 1]) / 2.0);
  return out;
}

namespace {

struct HeaderInfo {
  int n = 0;
  int m = 0;
  bool directed = false;
};

HeaderInfo parse_pair_header(std::istringstream& in, int& line) {
  std::string row;
  while (std::getline(in, row)) {
    line++;
    std::istringstream ls(row);
    std::string tag;
    if (!(ls >> tag) || tag == "c") continue;
    if (tag != "p") throw InstanceError(line, "expected 'p <n> <m> <u|d>' header");
    HeaderInfo h;
    std::string kind;
    if (!(ls >> h.n >> h.m >> kind) || (kind != "u" && kind != "d"))
      throw InstanceError(line, "malformed header, want 'p <n> <m> <u|d>'");
    if (h.n < 0 || h.m < 0) throw InstanceError(line, "negative counts in header");
    h.directed = kind == "d";
    return h;
  }
  throw InstanceError(line, "missing header");
}

template <typename AddPair>
void parse_pairs(std::istringstream& in, int& line, int n, int m, AddPair add) {
  int found = 0;
  std::string row;
  while (std::getline(in, row)) {
    line++;
    std::istringstream ls(row);
    int u, v;
    std::string first;
    if (!(ls >> first) || first == "c") continue;
    try {
      u = std::stoi(first);
    } catch (...) {
      throw InstanceError(line, "expected vertex pair, got '" + row + "'");
    }
    if (!(ls >> v)) throw InstanceError(line, "expected vertex pair, got '" + row + "'");
    if (u < 1 || u > n || v < 1 || v > n)
      throw InstanceError(line, "endpoint out of range 1.." + std::to_string(n));
    if (found == m) throw InstanceError(line, "more pairs than the header declares");
    try {
      add(u, v);
    } catch (InstanceError& e) {
      throw InstanceError(line, e.what());
    }
    found++;
  }
  if (found != m)
    throw InstanceError(line, "pair count mismatch: header declares " + std::to_string(m) +
                                  ", found " + std::to_string(found));
}

}  // namespace

Graph parse_graph(std::string_view text) {
  std::istringstream in{std::string(text)};
  int line = 0;
  HeaderInfo h = parse_pair_header(in, line);
  if (h.directed) throw InstanceError(line, "directed instance where undirected expected");
  Graph g;
  g.n = h.n;
  parse_pairs(in, line, h.n, h.m, [&](int u, int v) { g.add_edge(u, v); });
  return g;
}

Digraph parse_digraph(std::string_view text) {
  std::istringstream in{std::string(text)};
  int line = 0;
  HeaderInfo h = parse_pair_header(in, line);
  if (!h.directed) throw InstanceError(line, "undirected instance where directed expected");
  Digraph g;
  g.n = h.n;
  std::set<std::pair<int, int>> seen;
  parse_pairs(in, line, h.n, h.m, [&](int u, int v) {
    if (!seen.insert({u, v}).second) throw InstanceError(0, "duplicate arc");
    g.add_arc(u, v);
  });
  return g;
}

Dataset parse_dataset(std::string_view text) {
  std::istringstream in{std::string(text)};
  Dataset d;
  std::map<std::string, int> label_ids;
  std::string row;
  int line = 0;
  while (std::getline(in, row)) {
    line++;
    // strip trailing CR from CRLF files
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(row);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2)
      throw InstanceError(line, "need at least one feature column and a label");
    Dataset::Row r;
    for (size_t i = 0; i + 1 < cells.size(); ++i) {
      try {
        size_t pos = 0;
        r.features.push_back(std::stod(cells[i], &pos));
        if (pos != cells[i].size()) throw std::invalid_argument("");
      } catch (...) {
        throw InstanceError(line, "non-numeric feature value '" + cells[i] + "'");
      }
    }
    const std::string& label = cells.back();
    auto [it, fresh] = label_ids.try_emplace(label, static_cast<int>(label_ids.size()));
    if (fresh) d.label_names.push_back(label);
    r.label = it->second;
    if (d.rows.empty()) {
      d.feature_count = static_cast<int>(r.features.size());
    } else if (static_cast<int>(r.features.size()) != d.feature_count) {
      throw InstanceError(line, "row has " + std::to_string(r.features.size()) +
                                    " features, expected " + std::to_string(d.feature_count));
    }
    d.rows.push_back(std::move(r));
  }
  // contradictory duplicates make an exact tree impossible; reject up front
  for (size_t i = 0; i < d.rows.size(); ++i)
    for (size_t j = i + 1; j < d.rows.size(); ++j)
      if (d.rows[i].features == d.rows[j].features && d.rows[i].label != d.rows[j].label)
        throw InstanceError(0, "rows " + std::to_string(i + 1) + " and " +
                                   std::to_string(j + 1) +
                                   " share features but disagree on the label");
  return d;
}

int dsatur_upper_bound(const Graph& g) {
  if (g.n < 1) throw InstanceError(0, "empty graph");
  std::vector<std::vector<int>> adj(g.n + 1);
  for (auto [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<int> color(g.n + 1, 0);  // 0 = uncolored
  std::vector<std::set<int>> neighbor_colors(g.n + 1);
  auto deg = g.degrees();
  int used = 0;
  for (int step = 0; step < g.n; ++step) {
    int best = -1;
    for (int v = 1; v <= g.n; ++v) {
      if (color[v]) continue;
      if (best == -1) {
        best = v;
        continue;
      }
      size_t sv = neighbor_colors[v].size(), sb = neighbor_colors[best].size();
      if (sv > sb || (sv == sb && deg[v] > deg[best])) best = v;
    }
    int c = 1;
    while (neighbor_colors[best].count(c)) c++;
    color[best] = c;
    used = std::max(used, c);
    for (int w : adj[best])
      if (!color[w]) neighbor_colors[w].insert(c);
  }
  return std::max(used, 1);
}

int greedy_fvs_upper_bound(const Digraph& g) {
  std::vector<char> removed(g.n + 1, 0);
  int count = 0;
  while (!g.is_acyclic(removed)) {
    // find one cycle, then delete its highest-degree vertex
    std::vector<std::vector<int>> out(g.n + 1);
    std::vector<int> deg(g.n + 1, 0);
    for (auto [u, v] : g.arcs) {
      if (removed[u] || removed[v]) continue;
      out[u].push_back(v);
      deg[u]++;
      deg[v]++;
    }
    std::vector<int> cycle = [&] {
      std::vector<int8_t> state(g.n + 1, 0);
      std::vector<int> path;
      std::vector<std::pair<int, size_t>> stack;
      for (int s = 1; s <= g.n; ++s) {
        if (state[s] != 0 || removed[s]) continue;
        stack.emplace_back(s, 0);
        state[s] = 1;
        path.push_back(s);
        while (!stack.empty()) {
          auto& [v, next] = stack.back();
          if (next < out[v].size()) {
            int w = out[v][next++];
            if (state[w] == 1) {
              // path from w to v closes the cycle
              auto it = std::find(path.begin(), path.end(), w);
              return std::vector<int>(it, path.end());
            }
            if (state[w] == 0) {
              state[w] = 1;
              stack.emplace_back(w, 0);
              path.push_back(w);
            }
          } else {
            state[v] = 2;
            stack.pop_back();
            path.pop_back();
          }
        }
      }
      return std::vector<int>{};
    }();
    if (cycle.empty()) break;  // unreachable: !is_acyclic found one
    int victim = cycle.front();
    for (int v : cycle)
      if (deg[v] > deg[victim]) victim = v;
    removed[victim] = 1;
    count++;
  }
  return count;
}

}  // namespace encls
