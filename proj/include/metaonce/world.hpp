#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "metaonce/error.hpp"
#include "metaonce/ontology.hpp"

namespace metaonce {

using EntityId = std::string;
using SceneId = std::string;
using RelationId = std::string;
using Seq = std::uint64_t;

struct Entity {
  EntityId id;
  std::string name;
  ConceptId concept_id;

  bool operator==(const Entity&) const = default;
};

struct Scene {
  SceneId id;
  std::string name;
  std::set<RelationId> allowed_relations;  // empty: every relation allowed

  [[nodiscard]] bool allows(const RelationId& r) const {
    return allowed_relations.empty() || allowed_relations.contains(r);
  }

  bool operator==(const Scene&) const = default;
};

/// (subject, relation, object); unique within one scene.
using Triple = std::tuple<EntityId, RelationId, EntityId>;

struct Edge {
  EntityId subject;
  RelationId relation;
  EntityId object;
  SceneId scene;
  Seq origin_event = 0;
  std::optional<Seq> derived_from;

  [[nodiscard]] Triple triple() const { return {subject, relation, object}; }
  [[nodiscard]] bool derived() const { return derived_from.has_value(); }

  bool operator==(const Edge&) const = default;
};

enum class Direction { Out, In, Both };

class SceneGraph {
 public:
  SceneGraph() = default;
  explicit SceneGraph(Scene scene) : scene_(std::move(scene)) {}

  [[nodiscard]] const Scene& scene() const { return scene_; }
  [[nodiscard]] const std::set<EntityId>& members() const { return members_; }
  [[nodiscard]] const std::map<Triple, Edge>& edges() const { return edges_; }

  [[nodiscard]] bool is_member(const EntityId& id) const { return members_.contains(id); }

  [[nodiscard]] const Edge* find_edge(const EntityId& s, const RelationId& r, const EntityId& o) const {
    auto it = edges_.find(Triple{s, r, o});
    return it == edges_.end() ? nullptr : &it->second;
  }

  void add_member(const EntityId& id) { members_.insert(id); }

  void insert_edge(Edge edge) {
    if (!is_member(edge.subject) || !is_member(edge.object)) {
      throw Error(ErrorKind::NonMemberEndpoint,
                  edge.subject + " -> " + edge.object + " in scene " + scene_.id);
    }
    if (!scene_.allows(edge.relation)) {
      throw Error(ErrorKind::RelationNotAllowedInScene, edge.relation + " in scene " + scene_.id);
    }
    edge.scene = scene_.id;
    auto key = edge.triple();
    if (edges_.contains(key)) {
      throw Error(ErrorKind::DuplicateEdge,
                  "(" + edge.subject + ", " + edge.relation + ", " + edge.object + ") in scene " + scene_.id);
    }
    edges_.emplace(std::move(key), std::move(edge));
  }

  Edge remove_edge(const EntityId& s, const RelationId& r, const EntityId& o) {
    auto it = edges_.find(Triple{s, r, o});
    if (it == edges_.end()) {
      throw Error(ErrorKind::EdgeNotFound, "(" + s + ", " + r + ", " + o + ") in scene " + scene_.id);
    }
    Edge removed = std::move(it->second);
    edges_.erase(it);
    return removed;
  }

  [[nodiscard]] std::set<std::pair<RelationId, EntityId>> neighbors(const EntityId& v, Direction dir) const {
    if (!is_member(v)) throw Error(ErrorKind::UnknownEntity, v + " is not a member of scene " + scene_.id);
    std::set<std::pair<RelationId, EntityId>> out;
    for (const auto& [key, e] : edges_) {
      if (dir != Direction::In && e.subject == v) out.emplace(e.relation, e.object);
      if (dir != Direction::Out && e.object == v) out.emplace(e.relation, e.subject);
    }
    return out;
  }

  bool operator==(const SceneGraph&) const = default;

 private:
  Scene scene_;
  std::set<EntityId> members_;
  std::map<Triple, Edge> edges_;
};

/// Permanent prohibition on re-establishing a set of relations between an
/// unordered pair of entities.
struct BanRecord {
  std::pair<EntityId, EntityId> pair;  // stored sorted
  std::set<RelationId> relations;
  Seq origin_event = 0;

  static std::pair<EntityId, EntityId> make_pair(EntityId a, EntityId b) {
    if (b < a) std::swap(a, b);
    return {std::move(a), std::move(b)};
  }

  [[nodiscard]] bool covers(const EntityId& a, const EntityId& b, const RelationId& r) const {
    return pair == make_pair(a, b) && relations.contains(r);
  }

  bool operator==(const BanRecord&) const = default;
};

struct WorldState {
  std::map<EntityId, Entity> entities;
  std::map<SceneId, SceneGraph> scenes;
  std::vector<BanRecord> bans;
  Seq last_event = 0;

  [[nodiscard]] const Entity* find_entity(const EntityId& id) const {
    auto it = entities.find(id);
    return it == entities.end() ? nullptr : &it->second;
  }

  [[nodiscard]] const SceneGraph* find_scene(const SceneId& id) const {
    auto it = scenes.find(id);
    return it == scenes.end() ? nullptr : &it->second;
  }

  [[nodiscard]] const SceneGraph& scene(const SceneId& id) const {
    const auto* g = find_scene(id);
    if (g == nullptr) throw Error(ErrorKind::UnknownScene, id);
    return *g;
  }

  [[nodiscard]] SceneGraph& scene(const SceneId& id) {
    auto it = scenes.find(id);
    if (it == scenes.end()) throw Error(ErrorKind::UnknownScene, id);
    return it->second;
  }

  // In-place forms of the graph primitives. The free functions below are the
  // value-semantic wrappers.

  void create_scene(const Ontology& ontology, Scene s) {
    if (s.id.empty()) throw Error(ErrorKind::InvalidArgument, "scene id must be non-empty");
    if (scenes.contains(s.id)) throw Error(ErrorKind::DuplicateScene, s.id);
    for (const auto& r : s.allowed_relations) {
      if (ontology.find_relation(r) == nullptr) throw Error(ErrorKind::UnknownRelationType, r);
    }
    auto id = s.id;
    scenes.emplace(std::move(id), SceneGraph(std::move(s)));
  }

  void add_entity(const Ontology& ontology, const Entity& e, const SceneId& scene_id) {
    if (e.id.empty()) throw Error(ErrorKind::InvalidArgument, "entity id must be non-empty");
    auto& graph = scene(scene_id);
    if (!ontology.has_concept(e.concept_id)) throw Error(ErrorKind::UnknownConcept, e.concept_id.path);
    if (const auto* existing = find_entity(e.id)) {
      if (existing->concept_id != e.concept_id || existing->name != e.name) {
        throw Error(ErrorKind::ConceptMismatch, e.id + " is already registered as " +
                                                    existing->name + " (" + existing->concept_id.path + ")");
      }
    } else {
      entities.emplace(e.id, e);
    }
    graph.add_member(e.id);
  }

  bool operator==(const WorldState&) const = default;
};

[[nodiscard]] inline WorldState create_scene(WorldState world, const Ontology& ontology, Scene s) {
  world.create_scene(ontology, std::move(s));
  return world;
}

[[nodiscard]] inline WorldState add_entity(WorldState world, const Ontology& ontology, const Entity& e,
                                           const SceneId& scene) {
  world.add_entity(ontology, e, scene);
  return world;
}

[[nodiscard]] inline SceneGraph insert_edge(SceneGraph graph, Edge edge) {
  graph.insert_edge(std::move(edge));
  return graph;
}

[[nodiscard]] inline SceneGraph remove_edge(SceneGraph graph, const EntityId& s, const RelationId& r,
                                            const EntityId& o) {
  graph.remove_edge(s, r, o);
  return graph;
}

[[nodiscard]] inline std::set<std::pair<RelationId, EntityId>> neighbors(const SceneGraph& graph,
                                                                         const EntityId& v, Direction dir) {
  return graph.neighbors(v, dir);
}

// ---- snapshot export -------------------------------------------------------
// nlohmann::json objects are std::map backed, so keys come out sorted. Arrays
// are emitted in id order, which makes dump() byte-stable.

inline nlohmann::json entity_json(const Entity& e) {
  return {{"id", e.id}, {"name", e.name}, {"concept", e.concept_id.path}};
}

inline nlohmann::json edge_json(const Edge& e) {
  return {{"subject", e.subject}, {"relation", e.relation}, {"object", e.object}, {"derived", e.derived()}};
}

inline nlohmann::json scene_json(const SceneGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [key, e] : g.edges()) edges.push_back(edge_json(e));
  return {{"id", g.scene().id}, {"name", g.scene().name}, {"members", g.members()}, {"edges", std::move(edges)}};
}

inline nlohmann::json export_snapshot(const WorldState& world) {
  nlohmann::json entities = nlohmann::json::array();
  for (const auto& [id, e] : world.entities) entities.push_back(entity_json(e));
  nlohmann::json scenes = nlohmann::json::array();
  for (const auto& [id, g] : world.scenes) scenes.push_back(scene_json(g));
  return {{"entities", std::move(entities)}, {"scenes", std::move(scenes)}};
}

/// Snapshot restricted to one scene and the entities that are its members.
inline nlohmann::json export_scene(const WorldState& world, const SceneId& id) {
  const auto& g = world.scene(id);
  nlohmann::json entities = nlohmann::json::array();
  for (const auto& m : g.members()) entities.push_back(entity_json(world.entities.at(m)));
  nlohmann::json scenes = nlohmann::json::array();
  scenes.push_back(scene_json(g));
  return {{"entities", std::move(entities)}, {"scenes", std::move(scenes)}};
}

}  // namespace metaonce
