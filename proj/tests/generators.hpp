#pragma once

#include <random>
#include <string>
#include <vector>

#include "metaonce/metaonce.hpp"

namespace generators {

/// Rule-free vocabulary with three relations over a single concept.
inline const metaonce::Ontology& plain_ontology() {
  static const metaonce::Ontology o = metaonce::Ontology::load(R"({
    "concepts": [{"id": "/Thing", "label": "Thing"}],
    "relations": [
      {"id": "r0", "label": "r0", "subject": "/Thing", "object": "/Thing"},
      {"id": "r1", "label": "r1", "subject": "/Thing", "object": "/Thing"},
      {"id": "r2", "label": "r2", "subject": "/Thing", "object": "/Thing"}
    ]
  })");
  return o;
}

/// Random world of up to max_scenes scenes over a shared pool of up to
/// max_entities entities, with up to max_edges edges per scene. Entities
/// appear in several scenes with the same identity.
inline metaonce::WorldState random_world(std::mt19937& rng, int max_scenes = 5, int max_entities = 15,
                                         int max_edges = 40) {
  using namespace metaonce;
  const auto& o = plain_ontology();
  WorldState w;
  int scenes = std::uniform_int_distribution<int>(1, max_scenes)(rng);
  int entities = std::uniform_int_distribution<int>(1, max_entities)(rng);
  std::bernoulli_distribution member(0.6);
  for (int s = 0; s < scenes; ++s) {
    auto sid = "s" + std::to_string(s);
    w.create_scene(o, {sid, "Scene " + std::to_string(s), {}});
    std::vector<EntityId> members;
    for (int e = 0; e < entities; ++e) {
      if (!member(rng)) continue;
      EntityId id = "e" + std::to_string(e);
      w.add_entity(o, {id, "Entity " + std::to_string(e), ConceptId("/Thing")}, sid);
      members.push_back(id);
    }
    if (members.empty()) continue;
    int m = std::uniform_int_distribution<int>(0, max_edges)(rng);
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    std::uniform_int_distribution<int> rel(0, 2);
    auto& g = w.scene(sid);
    for (int i = 0; i < m; ++i) {
      Edge e{members[pick(rng)], "r" + std::to_string(rel(rng)), members[pick(rng)], sid, 0, std::nullopt};
      if (g.find_edge(e.subject, e.relation, e.object) == nullptr) g.insert_edge(e);
    }
  }
  return w;
}

/// Random non-empty selection of scene ids, possibly with repeats.
inline std::vector<metaonce::SceneId> random_selection(std::mt19937& rng, const metaonce::WorldState& w) {
  std::vector<metaonce::SceneId> ids;
  for (const auto& [id, g] : w.scenes) ids.push_back(id);
  std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
  int k = std::uniform_int_distribution<int>(1, static_cast<int>(ids.size()) + 1)(rng);
  std::vector<metaonce::SceneId> out;
  for (int i = 0; i < k; ++i) out.push_back(ids[pick(rng)]);
  return out;
}

}  // namespace generators
