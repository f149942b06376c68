#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "metaonce/error.hpp"
#include "metaonce/world.hpp"

namespace metaonce {

struct MergedEdge {
  EntityId subject;
  RelationId relation;
  EntityId object;
  std::set<SceneId> provenance;
  // Scenes in which the triple exists only as a rule-derived edge.
  std::set<SceneId> derived_in;

  [[nodiscard]] bool derived_everywhere() const { return derived_in == provenance; }

  bool operator==(const MergedEdge&) const = default;
};

/// Union of several scene graphs, entities aligned by id, one edge per triple.
struct MergedGraph {
  std::map<EntityId, Entity> entities;
  std::map<Triple, MergedEdge> edges;
  std::vector<SceneId> source_scenes;  // sorted, deduplicated

  bool operator==(const MergedGraph&) const = default;
};

inline MergedGraph merge_scenes(const WorldState& world, const std::vector<SceneId>& scenes) {
  if (scenes.empty()) throw Error(ErrorKind::EmptySelection, "no scenes selected for merge");
  MergedGraph merged;
  std::set<SceneId> unique(scenes.begin(), scenes.end());
  for (const auto& sid : unique) {
    const auto& g = world.scene(sid);
    for (const auto& m : g.members()) merged.entities.emplace(m, world.entities.at(m));
    for (const auto& [key, e] : g.edges()) {
      auto [it, fresh] = merged.edges.try_emplace(key, MergedEdge{e.subject, e.relation, e.object, {}, {}});
      it->second.provenance.insert(sid);
      if (e.derived()) it->second.derived_in.insert(sid);
    }
  }
  merged.source_scenes.assign(unique.begin(), unique.end());
  return merged;
}

enum class RelationDirection { Forward, Backward };

struct JointRelation {
  RelationId relation;
  RelationDirection direction;  // Forward: a -> b
  std::set<SceneId> provenance;

  auto operator<=>(const JointRelation&) const = default;
  bool operator==(const JointRelation&) const = default;
};

/// Every relation between a and b across the merged scenes, both directions.
inline std::set<JointRelation> joint_relations(const MergedGraph& merged, const EntityId& a, const EntityId& b) {
  if (!merged.entities.contains(a)) throw Error(ErrorKind::UnknownEntity, a);
  if (!merged.entities.contains(b)) throw Error(ErrorKind::UnknownEntity, b);
  std::set<JointRelation> out;
  for (const auto& [key, e] : merged.edges) {
    if (e.subject == a && e.object == b) out.insert({e.relation, RelationDirection::Forward, e.provenance});
    if (e.subject == b && e.object == a && a != b) out.insert({e.relation, RelationDirection::Backward, e.provenance});
  }
  return out;
}

inline std::string merged_scene_id(const MergedGraph& merged) {
  std::string id;
  for (const auto& s : merged.source_scenes) {
    if (!id.empty()) id += '+';
    id += s;
  }
  return id;
}

/// Snapshot schema of a single scene named after its sources, each edge
/// additionally carrying its "scenes" provenance.
inline nlohmann::json export_merged(const MergedGraph& merged) {
  nlohmann::json entities = nlohmann::json::array();
  std::vector<EntityId> members;
  for (const auto& [id, e] : merged.entities) {
    entities.push_back(entity_json(e));
    members.push_back(id);
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [key, e] : merged.edges) {
    edges.push_back({{"subject", e.subject},
                     {"relation", e.relation},
                     {"object", e.object},
                     {"derived", e.derived_everywhere()},
                     {"scenes", e.provenance}});
  }
  nlohmann::json scene{{"id", merged_scene_id(merged)}, {"name", "merged"}, {"members", members}, {"edges", edges}};
  return {{"entities", std::move(entities)},
          {"scenes", nlohmann::json::array({std::move(scene)})},
          {"source_scenes", merged.source_scenes}};
}

}  // namespace metaonce
