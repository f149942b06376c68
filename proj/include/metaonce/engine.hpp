#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "metaonce/error.hpp"
#include "metaonce/event_log.hpp"
#include "metaonce/ontology.hpp"
#include "metaonce/rules.hpp"
#include "metaonce/world.hpp"

namespace metaonce {

struct ActionOutcome {
  Decision decision;
  std::vector<Edge> added;
  std::vector<Edge> removed;
};

/// Owns the ontology, the current world and the event log. Every mutation is
/// serialized: the candidate world is computed, its events are made durable,
/// and only then is the new world published. Readers take immutable
/// snapshots.
class Engine {
 public:
  explicit Engine(Ontology ontology) : ontology_(std::move(ontology)), world_(std::make_shared<WorldState>()) {}

  /// Opens the event log in data_dir and rebuilds the world by replay.
  Engine(Ontology ontology, const std::filesystem::path& data_dir)
      : ontology_(std::move(ontology)), log_(EventLog::open(data_dir)) {
    world_ = std::make_shared<WorldState>(replay(log_, ontology_));
  }

  [[nodiscard]] const Ontology& ontology() const { return ontology_; }

  [[nodiscard]] std::shared_ptr<const WorldState> snapshot() const {
    std::lock_guard lock(mutex_);
    return world_;
  }

  [[nodiscard]] std::vector<Event> history(const HistoryFilter& filter = {}) const {
    std::lock_guard lock(mutex_);
    return query_history(log_, filter);
  }

  [[nodiscard]] std::size_t event_count() const {
    std::lock_guard lock(mutex_);
    return log_.size();
  }

  void create_scene(Scene scene) {
    std::lock_guard lock(mutex_);
    WorldState next = *world_;
    auto event = scene_created_event(next.last_event + 1, scene);
    apply_event(next, ontology_, event);
    commit(std::move(next), {event});
  }

  void add_entity(const Entity& entity, const SceneId& scene) {
    std::lock_guard lock(mutex_);
    WorldState next = *world_;
    if (const auto* existing = next.find_entity(entity.id)) {
      if (next.scene(scene).is_member(entity.id) && *existing == entity) return;
    }
    auto event = entity_added_event(next.last_event + 1, entity, scene);
    apply_event(next, ontology_, event);
    commit(std::move(next), {event});
  }

  ActionOutcome submit(const ActionRequest& req) {
    std::lock_guard lock(mutex_);
    auto result = apply_action(*world_, ontology_, req);
    if (result.decision.accepted()) commit(std::move(result.world), std::move(result.events));
    return {std::move(result.decision), std::move(result.added), std::move(result.removed)};
  }

  [[nodiscard]] Decision check(const ActionRequest& req) const {
    auto world = snapshot();
    return check_action(*world, ontology_, req);
  }

  /// Runs a seed script: a JSON array of scene declarations
  /// ({"type":"scene", id, name, allowed_relations?}), entity declarations
  /// ({"type":"entity", id, name, concept, scene | scenes}) and actions
  /// ({actor, verb, subject, relation, object, scene}). Returns one decision
  /// per action in order.
  std::vector<Decision> run_script(const nlohmann::json& script);

 private:
  static std::string utc_now() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  // Caller holds mutex_.
  void commit(WorldState next, std::vector<Event> events) {
    auto ts = utc_now();
    for (auto& e : events) e.ts = ts;
    log_.append(events);  // throws StorageError before anything is published
    world_ = std::make_shared<const WorldState>(std::move(next));
  }

  Ontology ontology_;
  EventLog log_;
  std::shared_ptr<const WorldState> world_;
  mutable std::mutex mutex_;
};

namespace detail {

inline std::string script_string(const nlohmann::json& item, const char* key) {
  if (!item.contains(key) || !item[key].is_string()) {
    throw Error(ErrorKind::ParseError, std::string("script item lacks string \"") + key + "\": " + item.dump());
  }
  return item[key].get<std::string>();
}

}  // namespace detail

inline ActionRequest action_from_json(const nlohmann::json& item) {
  using detail::script_string;
  ActionRequest req;
  req.actor = script_string(item, "actor");
  auto verb = parse_verb(script_string(item, "verb"));
  if (!verb) throw Error(ErrorKind::ParseError, "verb must be \"establish\" or \"cancel\"");
  req.verb = *verb;
  req.subject = item.contains("subject") ? script_string(item, "subject") : req.actor;
  req.relation = script_string(item, "relation");
  req.object = script_string(item, "object");
  req.scene = script_string(item, "scene");
  return req;
}

inline std::vector<Decision> Engine::run_script(const nlohmann::json& script) {
  using detail::script_string;
  if (!script.is_array()) throw Error(ErrorKind::ParseError, "seed script must be a JSON array");
  std::vector<Decision> decisions;
  for (const auto& item : script) {
    if (!item.is_object()) throw Error(ErrorKind::ParseError, "seed script items must be objects");
    auto type = item.value("type", item.contains("verb") ? "action" : "");
    if (type == "scene") {
      Scene s{script_string(item, "id"), item.value("name", ""), {}};
      if (item.contains("allowed_relations")) s.allowed_relations = item["allowed_relations"].get<std::set<RelationId>>();
      create_scene(std::move(s));
    } else if (type == "entity") {
      Entity e{script_string(item, "id"), item.value("name", ""), ConceptId(script_string(item, "concept"))};
      std::vector<SceneId> scenes;
      if (item.contains("scenes")) scenes = item["scenes"].get<std::vector<SceneId>>();
      if (item.contains("scene")) scenes.push_back(script_string(item, "scene"));
      if (scenes.empty()) throw Error(ErrorKind::ParseError, "entity " + e.id + " names no scene");
      for (const auto& s : scenes) add_entity(e, s);
    } else if (type == "action") {
      decisions.push_back(submit(action_from_json(item)).decision);
    } else {
      throw Error(ErrorKind::ParseError, "unknown script item: " + item.dump());
    }
  }
  return decisions;
}

}  // namespace metaonce
