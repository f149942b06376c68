#pragma once

// Brute-force reference implementations used only by tests. They work on a
// plain edge list and share no code with metaonce::analytics.

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "metaonce/analytics.hpp"

namespace oracle {

struct RawEdge {
  int from;
  int to;
  std::string relation;
  double weight;
};

struct RawGraph {
  int n = 0;
  std::vector<RawEdge> edges;
};

/// Zero-padded so that string order matches numeric order.
inline std::string name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "v%02d", i);
  return buf;
}

inline RawGraph random_graph(std::mt19937& rng, int max_vertices, int max_edges, int min_weight, int max_weight,
                             bool allow_self_loops = true) {
  RawGraph g;
  g.n = std::uniform_int_distribution<int>(1, max_vertices)(rng);
  int m = std::uniform_int_distribution<int>(0, max_edges)(rng);
  std::uniform_int_distribution<int> vertex(0, g.n - 1);
  std::uniform_int_distribution<int> weight(min_weight, max_weight);
  std::uniform_int_distribution<int> rel(0, 2);
  for (int i = 0; i < m; ++i) {
    int u = vertex(rng);
    int v = vertex(rng);
    if (u == v && !allow_self_loops) continue;
    RawEdge e{u, v, "r" + std::to_string(rel(rng)), static_cast<double>(weight(rng))};
    bool dup = std::any_of(g.edges.begin(), g.edges.end(), [&](const RawEdge& x) {
      return x.from == e.from && x.to == e.to && x.relation == e.relation;
    });
    if (!dup) g.edges.push_back(e);
  }
  return g;
}

inline metaonce::analytics::AnalysisGraph to_analysis(const RawGraph& raw, bool directed = true) {
  metaonce::analytics::AnalysisGraph g(directed);
  for (int i = 0; i < raw.n; ++i) g.add_vertex(name(i));
  for (const auto& e : raw.edges) g.add_edge(name(e.from), name(e.to), e.relation, e.weight);
  return g;
}

constexpr double inf = std::numeric_limits<double>::infinity();

inline std::vector<std::vector<double>> floyd_warshall(const RawGraph& g, bool directed = true) {
  std::vector<std::vector<double>> d(g.n, std::vector<double>(g.n, inf));
  for (int i = 0; i < g.n; ++i) d[i][i] = 0;
  for (const auto& e : g.edges) {
    d[e.from][e.to] = std::min(d[e.from][e.to], e.weight);
    if (!directed) d[e.to][e.from] = std::min(d[e.to][e.from], e.weight);
  }
  for (int k = 0; k < g.n; ++k)
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

inline double min_arc(const RawGraph& g, int u, int v) {
  double best = inf;
  for (const auto& e : g.edges)
    if (e.from == u && e.to == v) best = std::min(best, e.weight);
  return best;
}

/// A path as (vertex names, relation names, weights).
struct RawPath {
  std::vector<std::string> vertices;
  std::vector<std::string> relations;
  std::vector<double> weights;
  double total = 0;

  auto operator<=>(const RawPath&) const = default;
};

/// Simple paths s -> t with at most max_hops edges, grown breadth-first from
/// the edge list. Parallel edges give distinct paths.
inline std::vector<RawPath> enumerate_paths(const RawGraph& g, int s, int t, std::size_t max_hops) {
  struct Partial {
    std::vector<int> vs;
    RawPath p;
  };
  std::vector<RawPath> done;
  if (s == t) return done;
  std::vector<Partial> frontier{{{s}, {{name(s)}, {}, {}, 0}}};
  for (std::size_t hop = 0; hop < max_hops && !frontier.empty(); ++hop) {
    std::vector<Partial> next;
    for (const auto& part : frontier) {
      for (const auto& e : g.edges) {
        if (e.from != part.vs.back()) continue;
        if (std::find(part.vs.begin(), part.vs.end(), e.to) != part.vs.end()) continue;
        Partial ext = part;
        ext.vs.push_back(e.to);
        ext.p.vertices.push_back(name(e.to));
        ext.p.relations.push_back(e.relation);
        ext.p.weights.push_back(e.weight);
        ext.p.total += e.weight;
        if (e.to == t) {
          done.push_back(ext.p);
        } else {
          next.push_back(std::move(ext));
        }
      }
    }
    frontier = std::move(next);
  }
  return done;
}

/// Min-weight simple path, ties by smallest vertex sequence.
inline std::optional<RawPath> best_path(const RawGraph& g, int s, int t) {
  if (s == t) return RawPath{{name(s)}, {}, {}, 0};
  auto all = enumerate_paths(g, s, t, static_cast<std::size_t>(g.n));
  if (all.empty()) return std::nullopt;
  return *std::min_element(all.begin(), all.end(), [](const RawPath& a, const RawPath& b) {
    return std::tie(a.total, a.vertices) < std::tie(b.total, b.vertices);
  });
}

inline std::vector<std::vector<bool>> undirected_matrix(const RawGraph& g) {
  std::vector<std::vector<bool>> adj(g.n, std::vector<bool>(g.n, false));
  for (const auto& e : g.edges) {
    if (e.from == e.to) continue;
    adj[e.from][e.to] = adj[e.to][e.from] = true;
  }
  return adj;
}

inline int count_components(const std::vector<std::vector<bool>>& adj, int removed) {
  int n = static_cast<int>(adj.size());
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (i != removed && j != removed && adj[i][j]) parent[find(i)] = find(j);
  std::set<int> roots;
  for (int i = 0; i < n; ++i)
    if (i != removed) roots.insert(find(i));
  return static_cast<int>(roots.size());
}

/// Vertices whose removal increases the component count.
inline std::set<std::string> cut_vertices(const RawGraph& g) {
  auto adj = undirected_matrix(g);
  int base = count_components(adj, -1);
  std::set<std::string> out;
  for (int v = 0; v < g.n; ++v) {
    if (count_components(adj, v) > base) out.insert(name(v));
  }
  return out;
}

inline std::set<std::string> dense_vertices(const RawGraph& g, double threshold) {
  auto adj = undirected_matrix(g);
  std::set<std::string> out;
  for (int v = 0; v < g.n; ++v) {
    int deg = 0;
    int links = 0;
    for (int j = 0; j < g.n; ++j) {
      if (!adj[v][j]) continue;
      ++deg;
      for (int k = j + 1; k < g.n; ++k)
        if (adj[v][k] && adj[j][k]) ++links;
    }
    if (deg >= 2 && static_cast<double>(links) / (deg * (deg - 1) / 2.0) >= threshold) out.insert(name(v));
  }
  return out;
}

inline RawPath to_raw(const metaonce::analytics::Path& p) {
  RawPath r;
  r.vertices = p.vertices;
  for (const auto& step : p.edges) {
    r.relations.push_back(step.relation);
    r.weights.push_back(step.weight);
  }
  r.total = p.total_weight;
  return r;
}

/// Merge by brute force: scan every selected scene's edge list and collect
/// the scenes each triple appears in.
struct MergeResult {
  std::set<std::string> entities;
  std::map<std::tuple<std::string, std::string, std::string>, std::set<std::string>> provenance;
};

inline MergeResult merge(const metaonce::WorldState& w, const std::vector<std::string>& scenes) {
  MergeResult r;
  for (const auto& sid : scenes) {
    const auto& g = w.scenes.at(sid);
    for (const auto& m : g.members()) r.entities.insert(m);
    for (const auto& [key, e] : g.edges()) r.provenance[{e.subject, e.relation, e.object}].insert(sid);
  }
  return r;
}

}  // namespace oracle
