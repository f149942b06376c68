#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "metaonce/error.hpp"
#include "metaonce/merge.hpp"
#include "metaonce/world.hpp"

namespace metaonce::analytics {

using Weight = double;
using WeightMap = std::map<RelationId, Weight>;

struct Arc {
  EntityId target;
  RelationId relation;
  Weight weight = 1;

  auto operator<=>(const Arc&) const = default;
  bool operator==(const Arc&) const = default;
};

/// Weighted multigraph view used by the search and structure routines. Arcs
/// out of each vertex are kept sorted by (target, relation, weight).
class AnalysisGraph {
 public:
  explicit AnalysisGraph(bool directed = true) : directed_(directed) {}

  [[nodiscard]] bool directed() const { return directed_; }
  [[nodiscard]] const std::set<EntityId>& vertices() const { return vertices_; }
  [[nodiscard]] bool contains(const EntityId& v) const { return vertices_.contains(v); }

  [[nodiscard]] const std::vector<Arc>& arcs(const EntityId& v) const {
    static const std::vector<Arc> none;
    auto it = adjacency_.find(v);
    return it == adjacency_.end() ? none : it->second;
  }

  void add_vertex(const EntityId& v) { vertices_.insert(v); }

  void add_edge(const EntityId& from, const EntityId& to, const RelationId& relation, Weight weight = 1) {
    if (!(weight >= 0)) throw Error(ErrorKind::NegativeWeight, from + " -> " + to);
    if (!contains(from)) throw Error(ErrorKind::UnknownVertex, from);
    if (!contains(to)) throw Error(ErrorKind::UnknownVertex, to);
    insert_arc(from, Arc{to, relation, weight});
    if (!directed_ && from != to) insert_arc(to, Arc{from, relation, weight});
  }

  /// Reverse of a directed graph; an undirected graph is its own reverse.
  [[nodiscard]] AnalysisGraph reversed() const {
    if (!directed_) return *this;
    AnalysisGraph r(true);
    r.vertices_ = vertices_;
    for (const auto& [from, arcs] : adjacency_) {
      for (const auto& a : arcs) r.insert_arc(a.target, Arc{from, a.relation, a.weight});
    }
    return r;
  }

  /// Undirected simple graph: parallel arcs collapsed, self-loops dropped.
  [[nodiscard]] std::map<EntityId, std::set<EntityId>> undirected_projection() const {
    std::map<EntityId, std::set<EntityId>> adj;
    for (const auto& v : vertices_) adj[v];
    for (const auto& [from, arcs] : adjacency_) {
      for (const auto& a : arcs) {
        if (a.target == from) continue;
        adj[from].insert(a.target);
        adj[a.target].insert(from);
      }
    }
    return adj;
  }

  static AnalysisGraph from_scene(const SceneGraph& scene, const WeightMap& weights = {}, bool directed = true) {
    AnalysisGraph g(directed);
    for (const auto& m : scene.members()) g.add_vertex(m);
    for (const auto& [key, e] : scene.edges()) g.add_edge(e.subject, e.object, e.relation, weight_of(weights, e.relation));
    return g;
  }

  static AnalysisGraph from_merged(const MergedGraph& merged, const WeightMap& weights = {}, bool directed = true) {
    AnalysisGraph g(directed);
    for (const auto& [id, e] : merged.entities) g.add_vertex(id);
    for (const auto& [key, e] : merged.edges) g.add_edge(e.subject, e.object, e.relation, weight_of(weights, e.relation));
    return g;
  }

 private:
  static Weight weight_of(const WeightMap& weights, const RelationId& r) {
    auto it = weights.find(r);
    return it == weights.end() ? Weight{1} : it->second;
  }

  void insert_arc(const EntityId& from, Arc arc) {
    auto& list = adjacency_[from];
    list.insert(std::upper_bound(list.begin(), list.end(), arc), std::move(arc));
  }

  bool directed_;
  std::set<EntityId> vertices_;
  std::map<EntityId, std::vector<Arc>> adjacency_;
};

namespace detail {

inline void require_vertex(const AnalysisGraph& g, const EntityId& v) {
  if (!g.contains(v)) throw Error(ErrorKind::UnknownVertex, v);
}

// Distinct successors in ascending id order.
inline std::vector<EntityId> successors(const AnalysisGraph& g, const EntityId& v) {
  std::vector<EntityId> out;
  for (const auto& a : g.arcs(v)) {
    if (out.empty() || out.back() != a.target) out.push_back(a.target);
  }
  return out;
}

}  // namespace detail

enum class Strategy { BreadthFirst, DepthFirst };

/// Reachable vertices from start in visit order; neighbours expand in
/// ascending id order. Depth-first order equals recursive preorder.
inline std::vector<EntityId> traverse(const AnalysisGraph& g, const EntityId& start, Strategy strategy) {
  detail::require_vertex(g, start);
  std::vector<EntityId> order;
  std::set<EntityId> seen;
  if (strategy == Strategy::BreadthFirst) {
    std::deque<EntityId> queue{start};
    seen.insert(start);
    while (!queue.empty()) {
      auto v = std::move(queue.front());
      queue.pop_front();
      for (auto& n : detail::successors(g, v)) {
        if (seen.insert(n).second) queue.push_back(n);
      }
      order.push_back(std::move(v));
    }
  } else {
    std::vector<EntityId> stack{start};
    while (!stack.empty()) {
      auto v = std::move(stack.back());
      stack.pop_back();
      if (!seen.insert(v).second) continue;
      auto next = detail::successors(g, v);
      for (auto it = next.rbegin(); it != next.rend(); ++it) {
        if (!seen.contains(*it)) stack.push_back(*it);
      }
      order.push_back(std::move(v));
    }
  }
  return order;
}

struct Reach {
  Weight distance = 0;
  std::optional<EntityId> predecessor;

  bool operator==(const Reach&) const = default;
};

/// Dijkstra from source. Unreachable vertices are absent. A vertex's
/// predecessor is the smallest-id vertex settled before it through which its
/// distance is attained.
inline std::map<EntityId, Reach> sssp(const AnalysisGraph& g, const EntityId& source) {
  detail::require_vertex(g, source);
  std::map<EntityId, Weight> dist{{source, 0}};
  std::map<EntityId, std::size_t> settled_at;
  using Item = std::pair<Weight, EntityId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  pq.emplace(0, source);
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (settled_at.contains(v) || d > dist[v]) continue;
    settled_at.emplace(v, settled_at.size());
    for (const auto& a : g.arcs(v)) {
      if (a.weight < 0) throw Error(ErrorKind::NegativeWeight, v + " -> " + a.target);
      Weight nd = d + a.weight;
      auto it = dist.find(a.target);
      if (it == dist.end() || nd < it->second) {
        dist[a.target] = nd;
        pq.emplace(nd, a.target);
      }
    }
  }

  std::map<EntityId, Reach> out;
  for (const auto& [v, d] : dist) out[v].distance = d;
  for (const auto& [u, u_rank] : settled_at) {
    for (const auto& a : g.arcs(u)) {
      if (a.target == source || a.target == u) continue;
      auto& entry = out.at(a.target);
      if (settled_at.at(a.target) <= u_rank || dist[u] + a.weight != entry.distance) continue;
      if (!entry.predecessor || u < *entry.predecessor) entry.predecessor = u;
    }
  }
  return out;
}

struct PathStep {
  RelationId relation;
  Weight weight = 1;

  auto operator<=>(const PathStep&) const = default;
  bool operator==(const PathStep&) const = default;
};

struct Path {
  std::vector<EntityId> vertices;
  std::vector<PathStep> edges;
  Weight total_weight = 0;
  std::size_t hops = 0;

  bool operator==(const Path&) const = default;
};

/// Ordering used for path listings: weight, hop count, vertex sequence,
/// then relation sequence.
inline bool path_less(const Path& a, const Path& b) {
  return std::tie(a.total_weight, a.hops, a.vertices, a.edges) < std::tie(b.total_weight, b.hops, b.vertices, b.edges);
}

/// Minimum-weight path; among equal weights the lexicographically smallest
/// vertex sequence, using the lightest (then smallest relation) arc per hop.
inline std::optional<Path> shortest_path(const AnalysisGraph& g, const EntityId& s, const EntityId& t) {
  detail::require_vertex(g, s);
  detail::require_vertex(g, t);
  if (s == t) return Path{{s}, {}, 0, 0};
  auto from_s = sssp(g, s);
  if (!from_s.contains(t)) return std::nullopt;
  auto to_t = sssp(g.reversed(), t);
  const Weight best = from_s.at(t).distance;
  const Weight tol = 1e-9 * std::max<Weight>(1, best);

  auto on_optimal = [&](const EntityId& v) {
    auto a = from_s.find(v);
    auto b = to_t.find(v);
    return a != from_s.end() && b != to_t.end() && std::abs(a->second.distance + b->second.distance - best) <= tol;
  };

  // Depth-first over tight arcs in ascending target order; the first complete
  // walk is the lexicographically smallest. Backtracking only happens with
  // zero-weight cycles.
  Path path{{s}, {}, 0, 0};
  std::set<EntityId> on_path{s};
  std::function<bool(const EntityId&)> extend = [&](const EntityId& u) -> bool {
    if (u == t) return true;
    const auto& arcs = g.arcs(u);
    for (std::size_t i = 0; i < arcs.size(); ++i) {
      const auto& a = arcs[i];
      if (i > 0 && arcs[i - 1].target == a.target) continue;  // one candidate per target
      if (on_path.contains(a.target) || !on_optimal(a.target)) continue;
      const Arc* arc = &a;
      for (std::size_t j = i; j < arcs.size() && arcs[j].target == a.target; ++j) {
        if (std::tie(arcs[j].weight, arcs[j].relation) < std::tie(arc->weight, arc->relation)) arc = &arcs[j];
      }
      if (std::abs(from_s.at(u).distance + arc->weight - from_s.at(a.target).distance) > tol) continue;
      path.vertices.push_back(a.target);
      path.edges.push_back({arc->relation, arc->weight});
      on_path.insert(a.target);
      if (extend(a.target)) return true;
      on_path.erase(a.target);
      path.vertices.pop_back();
      path.edges.pop_back();
    }
    return false;
  };
  if (!extend(s)) return std::nullopt;
  path.hops = path.edges.size();
  for (const auto& step : path.edges) path.total_weight += step.weight;
  return path;
}

/// Every simple path from s to t with at most max_hops arcs. Parallel arcs
/// yield distinct paths. Sorted with path_less.
inline std::vector<Path> all_simple_paths(const AnalysisGraph& g, const EntityId& s, const EntityId& t,
                                          std::size_t max_hops = 8) {
  detail::require_vertex(g, s);
  detail::require_vertex(g, t);
  if (max_hops < 1) throw Error(ErrorKind::InvalidArgument, "max_hops must be at least 1");
  std::vector<Path> out;
  if (s == t) return out;
  Path cur{{s}, {}, 0, 0};
  std::set<EntityId> on_path{s};
  std::function<void(const EntityId&)> walk = [&](const EntityId& u) {
    if (u == t) {
      Path p = cur;
      p.hops = p.edges.size();
      p.total_weight = 0;
      for (const auto& step : p.edges) p.total_weight += step.weight;
      out.push_back(std::move(p));
      return;
    }
    if (cur.edges.size() == max_hops) return;
    for (const auto& a : g.arcs(u)) {
      if (on_path.contains(a.target)) continue;
      cur.vertices.push_back(a.target);
      cur.edges.push_back({a.relation, a.weight});
      on_path.insert(a.target);
      walk(a.target);
      on_path.erase(a.target);
      cur.vertices.pop_back();
      cur.edges.pop_back();
    }
  };
  walk(s);
  std::sort(out.begin(), out.end(), path_less);
  return out;
}

struct PathScore {
  Weight total_weight = 0;
  std::size_t hops = 0;
  Weight mean_edge_weight = 0;

  bool operator==(const PathScore&) const = default;
};

inline PathScore evaluate_path(const Path& p) {
  PathScore score;
  score.hops = p.edges.size();
  for (const auto& step : p.edges) score.total_weight += step.weight;
  score.mean_edge_weight = score.hops == 0 ? 0 : score.total_weight / static_cast<Weight>(score.hops);
  return score;
}

/// Cut vertices of the undirected projection (Hopcroft-Tarjan low-link).
inline std::set<EntityId> articulation_points(const AnalysisGraph& g) {
  auto adj = g.undirected_projection();
  std::map<EntityId, int> disc;
  std::map<EntityId, int> low;
  std::set<EntityId> cut;
  int timer = 0;

  struct Frame {
    EntityId v;
    std::optional<EntityId> parent;
    std::set<EntityId>::const_iterator next;
    int children = 0;
  };

  for (const auto& [root, ignored] : adj) {
    if (disc.contains(root)) continue;
    std::vector<Frame> stack;
    disc[root] = low[root] = timer++;
    stack.push_back({root, std::nullopt, adj.at(root).begin(), 0});
    while (!stack.empty()) {
      auto& f = stack.back();
      if (f.next != adj.at(f.v).end()) {
        const EntityId w = *f.next++;
        if (f.parent && w == *f.parent) continue;
        if (disc.contains(w)) {
          low[f.v] = std::min(low[f.v], disc[w]);
        } else {
          disc[w] = low[w] = timer++;
          ++f.children;
          stack.push_back({w, f.v, adj.at(w).begin(), 0});
        }
        continue;
      }
      Frame done = std::move(stack.back());
      stack.pop_back();
      if (stack.empty()) {
        if (done.children > 1) cut.insert(done.v);
        continue;
      }
      auto& parent = stack.back();
      low[parent.v] = std::min(low[parent.v], low[done.v]);
      if (parent.parent && low[done.v] >= disc[parent.v]) cut.insert(parent.v);
    }
  }
  return cut;
}

/// Local clustering coefficient on the undirected projection; none for
/// vertices of degree < 2.
inline std::optional<double> clustering_coefficient(const std::map<EntityId, std::set<EntityId>>& adj,
                                                    const EntityId& v) {
  const auto& nbrs = adj.at(v);
  const auto deg = nbrs.size();
  if (deg < 2) return std::nullopt;
  std::size_t links = 0;
  for (auto i = nbrs.begin(); i != nbrs.end(); ++i) {
    const auto& ni = adj.at(*i);
    for (auto j = std::next(i); j != nbrs.end(); ++j) {
      if (ni.contains(*j)) ++links;
    }
  }
  return static_cast<double>(links) / (static_cast<double>(deg * (deg - 1)) / 2.0);
}

/// Vertices with degree >= 2 whose neighbourhood is at least `threshold` dense.
inline std::set<EntityId> core_vertices(const AnalysisGraph& g, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidThreshold, "threshold must lie in [0, 1]");
  }
  auto adj = g.undirected_projection();
  std::set<EntityId> out;
  for (const auto& [v, nbrs] : adj) {
    auto cc = clustering_coefficient(adj, v);
    if (cc && *cc >= threshold) out.insert(v);
  }
  return out;
}

}  // namespace metaonce::analytics
