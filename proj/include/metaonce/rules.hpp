#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "metaonce/event_log.hpp"
#include "metaonce/ontology.hpp"
#include "metaonce/world.hpp"

namespace metaonce {

enum class Verb { Establish, Cancel };

inline std::string_view to_string(Verb v) { return v == Verb::Establish ? "establish" : "cancel"; }

inline std::optional<Verb> parse_verb(std::string_view s) {
  if (s == "establish") return Verb::Establish;
  if (s == "cancel") return Verb::Cancel;
  return std::nullopt;
}

enum class ReasonCode {
  OK,
  EXCLUSIVE_CONFLICT,
  IRREVERSIBLE_BAN,
  DUPLICATE_RELATION,
  EDGE_NOT_FOUND,
  SCENE_DISALLOWED,
  TYPING_VIOLATION,
  UNKNOWN_ENTITY,
  NOT_AUTHORIZED,
};

inline std::string_view to_string(ReasonCode c) {
  switch (c) {
    case ReasonCode::OK: return "OK";
    case ReasonCode::EXCLUSIVE_CONFLICT: return "EXCLUSIVE_CONFLICT";
    case ReasonCode::IRREVERSIBLE_BAN: return "IRREVERSIBLE_BAN";
    case ReasonCode::DUPLICATE_RELATION: return "DUPLICATE_RELATION";
    case ReasonCode::EDGE_NOT_FOUND: return "EDGE_NOT_FOUND";
    case ReasonCode::SCENE_DISALLOWED: return "SCENE_DISALLOWED";
    case ReasonCode::TYPING_VIOLATION: return "TYPING_VIOLATION";
    case ReasonCode::UNKNOWN_ENTITY: return "UNKNOWN_ENTITY";
    case ReasonCode::NOT_AUTHORIZED: return "NOT_AUTHORIZED";
  }
  return "";
}

/// Relation whose edge (E, BelongsTo, actor) lets actor act on behalf of E.
inline constexpr std::string_view ownership_relation = "BelongsTo";

struct ActionRequest {
  EntityId actor;
  Verb verb = Verb::Establish;
  EntityId subject;
  RelationId relation;
  EntityId object;
  SceneId scene;

  bool operator==(const ActionRequest&) const = default;
};

enum class Outcome { Accepted, Rejected };

inline std::string_view to_string(Outcome o) { return o == Outcome::Accepted ? "Accepted" : "Rejected"; }

struct Decision {
  Outcome outcome = Outcome::Accepted;
  ReasonCode reason_code = ReasonCode::OK;
  std::string message;
  std::optional<Edge> conflicting_edge;
  // The request the verdict is about; used to render messages.
  EntityId subject;
  RelationId relation;
  EntityId object;

  [[nodiscard]] bool accepted() const { return outcome == Outcome::Accepted; }

  bool operator==(const Decision&) const = default;
};

struct ApplyResult {
  WorldState world;
  std::vector<Event> events;
  Decision decision;
  std::vector<Edge> added;
  std::vector<Edge> removed;
};

/// True when actor may issue requests whose subject is `subject`.
inline bool controls(const WorldState& world, const EntityId& actor, const EntityId& subject) {
  if (actor == subject) return true;
  const RelationId owns(ownership_relation);
  for (const auto& [id, g] : world.scenes) {
    if (g.find_edge(subject, owns, actor) != nullptr) return true;
  }
  return false;
}

namespace detail {

inline std::string replace_all(std::string text, std::string_view key, const std::string& value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

inline std::string display_name(const WorldState& world, const EntityId& id) {
  const auto* e = world.find_entity(id);
  return e != nullptr && !e->name.empty() ? e->name : id;
}

inline std::string default_template(ReasonCode code) {
  switch (code) {
    case ReasonCode::OK: return "";
    case ReasonCode::EXCLUSIVE_CONFLICT: return "Sorry, {object} already has a {relation} relation with {holder}.";
    case ReasonCode::IRREVERSIBLE_BAN: return "Sorry, {subject} and {object} can no longer restore {relation}.";
    case ReasonCode::DUPLICATE_RELATION: return "{subject} already has {relation} to {object} in this scene.";
    case ReasonCode::EDGE_NOT_FOUND: return "There is no {relation} from {subject} to {object} in this scene.";
    case ReasonCode::SCENE_DISALLOWED: return "{relation} is not available in this scene.";
    case ReasonCode::TYPING_VIOLATION: return "{relation} cannot connect {subject} and {object}.";
    case ReasonCode::UNKNOWN_ENTITY: return "Unknown entity in request.";
    case ReasonCode::NOT_AUTHORIZED: return "You are not allowed to change this relation of {subject}.";
  }
  return "";
}

}  // namespace detail

/// Deterministic rejection text. Relation types may override the template
/// for a reason code through their "messages" map.
inline std::string render_rejection_message(const Decision& decision, const WorldState& world,
                                            const Ontology& ontology) {
  if (decision.accepted()) return {};
  std::string text = detail::default_template(decision.reason_code);
  if (const auto* rel = ontology.find_relation(decision.relation)) {
    auto it = rel->messages.find(detail::lowercase(to_string(decision.reason_code)));
    if (it != rel->messages.end()) text = it->second;
  }
  std::string relation_label = decision.relation;
  if (const auto* rel = ontology.find_relation(decision.relation); rel != nullptr && !rel->label.empty()) {
    relation_label = rel->label;
  }
  std::string holder = decision.conflicting_edge ? detail::display_name(world, decision.conflicting_edge->subject) : "";
  text = detail::replace_all(std::move(text), "{holder}", holder);
  text = detail::replace_all(std::move(text), "{subject}", detail::display_name(world, decision.subject));
  text = detail::replace_all(std::move(text), "{object}", detail::display_name(world, decision.object));
  text = detail::replace_all(std::move(text), "{relation}", relation_label);
  return text;
}

namespace detail {

inline Decision verdict(const ActionRequest& req, ReasonCode code) {
  Decision d;
  d.outcome = code == ReasonCode::OK ? Outcome::Accepted : Outcome::Rejected;
  d.reason_code = code;
  d.subject = req.subject;
  d.relation = req.relation;
  d.object = req.object;
  return d;
}

inline Decision finish(Decision d, const WorldState& world, const Ontology& ontology) {
  if (!d.accepted()) d.message = render_rejection_message(d, world, ontology);
  return d;
}

// Edges a fresh establish would derive: symmetric mirror and co-occurrence
// companion, both pointing back at the subject.
inline std::vector<RelationId> derived_relations(const RelationType& rel, const ActionRequest& req) {
  std::vector<RelationId> out;
  if (rel.has(ConstraintKind::Symmetric) && req.subject != req.object) out.push_back(rel.id);
  if (rel.has(ConstraintKind::AsymmetricCoOccurrence) && rel.companion) out.push_back(*rel.companion);
  return out;
}

inline std::optional<Edge> find_exclusive_conflict(const WorldState& world, const RelationType& rel,
                                                   const ActionRequest& req) {
  for (const auto& [sid, g] : world.scenes) {
    for (const auto& [key, e] : g.edges()) {
      if (e.relation != rel.id) continue;
      if (e.object != req.object) continue;
      // The same holder in another scene also counts: the object keeps a
      // single primary incoming edge across the metaverse.
      if (e.subject != req.subject || !e.derived()) return e;
    }
  }
  if (rel.has(ConstraintKind::Symmetric)) {
    // The subject side is protected through the mirror edge.
    for (const auto& [sid, g] : world.scenes) {
      for (const auto& [key, e] : g.edges()) {
        if (e.relation != rel.id) continue;
        if (e.object == req.subject && e.subject != req.object && e.subject != req.subject) return e;
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Verdict for an establish request. Checks run in a fixed order and the
/// first failure wins. Never modifies state.
inline Decision check_establish(const WorldState& world, const Ontology& ontology, const ActionRequest& req) {
  using detail::finish;
  using detail::verdict;

  const auto* subject = world.find_entity(req.subject);
  const auto* object = world.find_entity(req.object);
  if (world.find_entity(req.actor) == nullptr || subject == nullptr || object == nullptr) {
    return finish(verdict(req, ReasonCode::UNKNOWN_ENTITY), world, ontology);
  }
  const auto* scene = world.find_scene(req.scene);
  if (scene != nullptr && (!scene->is_member(req.subject) || !scene->is_member(req.object))) {
    return finish(verdict(req, ReasonCode::UNKNOWN_ENTITY), world, ontology);
  }
  if (!controls(world, req.actor, req.subject)) {
    return finish(verdict(req, ReasonCode::NOT_AUTHORIZED), world, ontology);
  }

  const auto* rel = ontology.find_relation(req.relation);
  if (scene == nullptr || !scene->scene().allows(req.relation)) {
    return finish(verdict(req, ReasonCode::SCENE_DISALLOWED), world, ontology);
  }
  if (rel == nullptr) return finish(verdict(req, ReasonCode::TYPING_VIOLATION), world, ontology);
  for (const auto& d : detail::derived_relations(*rel, req)) {
    if (!scene->scene().allows(d)) return finish(verdict(req, ReasonCode::SCENE_DISALLOWED), world, ontology);
  }

  if (!ontology.validate_relation_typing(subject->concept_id, rel->id, object->concept_id)) {
    return finish(verdict(req, ReasonCode::TYPING_VIOLATION), world, ontology);
  }
  for (const auto& d : detail::derived_relations(*rel, req)) {
    if (!ontology.validate_relation_typing(object->concept_id, d, subject->concept_id)) {
      return finish(verdict(req, ReasonCode::TYPING_VIOLATION), world, ontology);
    }
  }

  if (scene->find_edge(req.subject, req.relation, req.object) != nullptr) {
    return finish(verdict(req, ReasonCode::DUPLICATE_RELATION), world, ontology);
  }

  for (const auto& ban : world.bans) {
    if (ban.covers(req.subject, req.object, req.relation) ||
        (rel->companion && ban.covers(req.subject, req.object, *rel->companion))) {
      return finish(verdict(req, ReasonCode::IRREVERSIBLE_BAN), world, ontology);
    }
  }

  if (rel->has(ConstraintKind::Exclusive)) {
    if (auto conflict = detail::find_exclusive_conflict(world, *rel, req)) {
      auto d = verdict(req, ReasonCode::EXCLUSIVE_CONFLICT);
      d.conflicting_edge = std::move(conflict);
      return finish(std::move(d), world, ontology);
    }
  }
  return verdict(req, ReasonCode::OK);
}

namespace detail {

inline ApplyResult fold(const WorldState& world, const Ontology& ontology, std::vector<Event> events,
                        Decision decision) {
  ApplyResult result{world, std::move(events), std::move(decision), {}, {}};
  for (const auto& e : result.events) {
    if (e.kind == EventType::RelationCancelled || e.kind == EventType::DerivedRelationCancelled) {
      const auto& g = result.world.scene(*e.scene);
      const auto* edge = g.find_edge(e.payload["subject"], e.payload["relation"], e.payload["object"]);
      if (edge != nullptr) result.removed.push_back(*edge);
    }
    apply_event(result.world, ontology, e);
    if (e.kind == EventType::RelationEstablished || e.kind == EventType::DerivedRelationEstablished) {
      const auto& g = result.world.scene(*e.scene);
      result.added.push_back(*g.find_edge(e.payload["subject"], e.payload["relation"], e.payload["object"]));
    }
  }
  return result;
}

}  // namespace detail

/// Checks and, when accepted, produces the new world plus the event batch
/// (primary edge and every rule-derived edge). On rejection the returned
/// world equals the input and the batch is empty.
inline ApplyResult apply_establish(const WorldState& world, const Ontology& ontology, const ActionRequest& req) {
  auto decision = check_establish(world, ontology, req);
  if (!decision.accepted()) return ApplyResult{world, {}, std::move(decision), {}, {}};

  const auto& rel = ontology.relation(req.relation);
  const auto& scene = world.scene(req.scene);
  Seq seq = world.last_event + 1;
  Seq cause = seq;
  std::vector<Event> events;
  events.push_back(relation_event(seq++, EventType::RelationEstablished, req.scene, req.subject, req.relation,
                                  req.object, std::nullopt, req.actor));
  for (const auto& d : detail::derived_relations(rel, req)) {
    // An already-present companion (e.g. established directly) is left alone.
    if (scene.find_edge(req.object, d, req.subject) != nullptr) continue;
    events.push_back(
        relation_event(seq++, EventType::DerivedRelationEstablished, req.scene, req.object, d, req.subject, cause));
  }
  return detail::fold(world, ontology, std::move(events), std::move(decision));
}

inline Decision check_cancel(const WorldState& world, const Ontology& ontology, const ActionRequest& req) {
  using detail::finish;
  using detail::verdict;
  if (world.find_entity(req.actor) == nullptr || world.find_entity(req.subject) == nullptr ||
      world.find_entity(req.object) == nullptr) {
    return finish(verdict(req, ReasonCode::UNKNOWN_ENTITY), world, ontology);
  }
  const auto* scene = world.find_scene(req.scene);
  const Edge* edge = scene == nullptr ? nullptr : scene->find_edge(req.subject, req.relation, req.object);
  if (edge == nullptr) return finish(verdict(req, ReasonCode::EDGE_NOT_FOUND), world, ontology);
  if (!controls(world, req.actor, req.subject) || edge->derived()) {
    return finish(verdict(req, ReasonCode::NOT_AUTHORIZED), world, ontology);
  }
  return verdict(req, ReasonCode::OK);
}

/// Removes the edge, every edge derived from it, and the paired companion edge
/// under mutual termination or irreversibility. Irreversible relations also
/// record a permanent ban for the pair.
inline ApplyResult apply_cancel(const WorldState& world, const Ontology& ontology, const ActionRequest& req) {
  auto decision = check_cancel(world, ontology, req);
  if (!decision.accepted()) return ApplyResult{world, {}, std::move(decision), {}, {}};

  const auto& scene = world.scene(req.scene);
  const auto* rel = ontology.find_relation(req.relation);
  Seq seq = world.last_event + 1;
  const Seq cause = seq;
  std::vector<Event> events;
  events.push_back(relation_event(seq++, EventType::RelationCancelled, req.scene, req.subject, req.relation,
                                  req.object, std::nullopt, req.actor));

  std::set<Triple> removed{Triple{req.subject, req.relation, req.object}};
  std::vector<const Edge*> work{scene.find_edge(req.subject, req.relation, req.object)};
  auto take = [&](const Edge* e) {
    if (e == nullptr || removed.contains(e->triple())) return;
    removed.insert(e->triple());
    events.push_back(relation_event(seq++, EventType::DerivedRelationCancelled, req.scene, e->subject, e->relation,
                                    e->object, cause));
    work.push_back(e);
  };

  bool terminates = rel != nullptr && rel->companion &&
                    (rel->has(ConstraintKind::MutualTermination) || rel->has(ConstraintKind::Irreversible));
  if (terminates) take(scene.find_edge(req.object, *rel->companion, req.subject));

  // Cascade: anything derived from a removed edge goes with it.
  while (!work.empty()) {
    const Edge* cur = work.back();
    work.pop_back();
    for (const auto& [key, e] : scene.edges()) {
      if (e.derived_from == cur->origin_event) take(&e);
    }
  }

  if (rel != nullptr && rel->has(ConstraintKind::Irreversible) && rel->companion) {
    BanRecord ban;
    ban.pair = BanRecord::make_pair(req.subject, req.object);
    ban.relations = {rel->id, *rel->companion};
    events.push_back(ban_event(seq++, ban, cause, req.scene));
  }
  return detail::fold(world, ontology, std::move(events), std::move(decision));
}

inline ApplyResult apply_action(const WorldState& world, const Ontology& ontology, const ActionRequest& req) {
  return req.verb == Verb::Establish ? apply_establish(world, ontology, req) : apply_cancel(world, ontology, req);
}

inline Decision check_action(const WorldState& world, const Ontology& ontology, const ActionRequest& req) {
  return req.verb == Verb::Establish ? check_establish(world, ontology, req) : check_cancel(world, ontology, req);
}

inline nlohmann::json decision_json(const Decision& d) {
  nlohmann::json j{{"outcome", std::string(to_string(d.outcome))},
                   {"reason_code", std::string(to_string(d.reason_code))},
                   {"message", d.message}};
  j["conflicting_edge"] = d.conflicting_edge ? edge_json(*d.conflicting_edge) : nlohmann::json(nullptr);
  return j;
}

}  // namespace metaonce
