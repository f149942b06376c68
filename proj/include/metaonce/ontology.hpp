#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "metaonce/error.hpp"

namespace metaonce {

/// Hierarchical concept path such as "/Thing/Person/Beauty".
struct ConceptId {
  std::string path;

  static constexpr std::string_view root_path = "/Thing";

  ConceptId() = default;
  explicit ConceptId(std::string p) : path(std::move(p)) {}

  [[nodiscard]] bool is_root() const { return path == root_path; }

  [[nodiscard]] std::vector<std::string> segments() const {
    std::vector<std::string> out;
    std::size_t pos = 1;
    while (pos <= path.size()) {
      auto next = path.find('/', pos);
      if (next == std::string::npos) next = path.size();
      out.push_back(path.substr(pos, next - pos));
      pos = next + 1;
    }
    return out;
  }

  /// The path with its last segment removed; none for the root.
  [[nodiscard]] std::optional<ConceptId> structural_parent() const {
    if (is_root()) return std::nullopt;
    auto cut = path.rfind('/');
    if (cut == std::string::npos || cut == 0) return std::nullopt;
    return ConceptId(path.substr(0, cut));
  }

  [[nodiscard]] bool well_formed() const {
    if (path.empty() || path.front() != '/') return false;
    auto segs = segments();
    if (segs.empty() || segs.front() != "Thing") return false;
    std::set<std::string> seen;
    for (const auto& s : segs) {
      if (s.empty() || !seen.insert(s).second) return false;
    }
    return true;
  }

  auto operator<=>(const ConceptId&) const = default;
  bool operator==(const ConceptId&) const = default;
};

struct Concept {
  ConceptId id;
  std::string label;
  std::optional<ConceptId> parent;

  bool operator==(const Concept&) const = default;
};

enum class ConstraintKind {
  Exclusive,
  Symmetric,
  AsymmetricCoOccurrence,
  MutualTermination,
  Irreversible,
};

inline std::string_view rule_name(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::Exclusive: return "exclusive";
    case ConstraintKind::Symmetric: return "symmetric";
    case ConstraintKind::AsymmetricCoOccurrence: return "co_occurrence";
    case ConstraintKind::MutualTermination: return "mutual_termination";
    case ConstraintKind::Irreversible: return "irreversible";
  }
  return "";
}

inline std::optional<ConstraintKind> parse_rule_name(std::string_view name) {
  for (auto kind : {ConstraintKind::Exclusive, ConstraintKind::Symmetric,
                    ConstraintKind::AsymmetricCoOccurrence, ConstraintKind::MutualTermination,
                    ConstraintKind::Irreversible}) {
    if (rule_name(kind) == name) return kind;
  }
  return std::nullopt;
}

inline bool needs_companion(ConstraintKind kind) {
  return kind == ConstraintKind::AsymmetricCoOccurrence ||
         kind == ConstraintKind::MutualTermination || kind == ConstraintKind::Irreversible;
}

struct RuleBinding {
  ConstraintKind kind{};
  std::optional<std::string> companion;

  auto operator<=>(const RuleBinding&) const = default;
  bool operator==(const RuleBinding&) const = default;
};

struct RelationType {
  std::string id;
  std::string label;
  ConceptId subject_concept;
  ConceptId object_concept;
  std::vector<RuleBinding> rule_bindings;  // sorted by kind, one per kind
  std::optional<std::string> companion;
  // Optional rejection-message templates keyed by lowercase reason code
  // ("exclusive_conflict", "irreversible_ban"). Placeholders: {holder},
  // {subject}, {object}, {relation}.
  std::map<std::string, std::string> messages;

  [[nodiscard]] bool has(ConstraintKind kind) const {
    return std::any_of(rule_bindings.begin(), rule_bindings.end(),
                       [kind](const RuleBinding& b) { return b.kind == kind; });
  }

  bool operator==(const RelationType&) const = default;
};

struct EventKind {
  std::string id;
  std::string label;

  bool operator==(const EventKind&) const = default;
};

/// Immutable vocabulary: concept tree, relation types with their rule
/// bindings, and event kinds. Extension returns a new value.
class Ontology {
 public:
  Ontology() = default;

  [[nodiscard]] const std::map<ConceptId, Concept>& concepts() const { return concepts_; }
  [[nodiscard]] const std::map<std::string, RelationType>& relation_types() const { return relations_; }
  [[nodiscard]] const std::map<std::string, EventKind>& event_kinds() const { return events_; }

  [[nodiscard]] bool has_concept(const ConceptId& id) const { return concepts_.contains(id); }

  [[nodiscard]] const Concept& concept_of(const ConceptId& id) const {
    auto it = concepts_.find(id);
    if (it == concepts_.end()) throw Error(ErrorKind::UnknownConcept, id.path);
    return it->second;
  }

  [[nodiscard]] const RelationType* find_relation(std::string_view id) const {
    auto it = relations_.find(std::string(id));
    return it == relations_.end() ? nullptr : &it->second;
  }

  [[nodiscard]] const RelationType& relation(std::string_view id) const {
    const auto* r = find_relation(id);
    if (r == nullptr) throw Error(ErrorKind::UnknownRelationType, std::string(id));
    return *r;
  }

  /// True iff a == b or b is an ancestor of a.
  [[nodiscard]] bool is_subconcept(const ConceptId& a, const ConceptId& b) const {
    (void)concept_of(b);
    const Concept* cur = &concept_of(a);
    for (std::size_t steps = 0; steps <= concepts_.size(); ++steps) {
      if (cur->id == b) return true;
      if (!cur->parent) return false;
      cur = &concept_of(*cur->parent);
    }
    throw Error(ErrorKind::ValidationError, "concept hierarchy contains a cycle");
  }

  [[nodiscard]] bool validate_relation_typing(const ConceptId& subject_concept,
                                              std::string_view relation_id,
                                              const ConceptId& object_concept) const {
    const auto& rel = relation(relation_id);
    return is_subconcept(subject_concept, rel.subject_concept) &&
           is_subconcept(object_concept, rel.object_concept);
  }

  [[nodiscard]] Ontology add_concept(Concept c) const {
    if (!c.id.well_formed()) throw Error(ErrorKind::ValidationError, "malformed concept id " + c.id.path);
    if (concepts_.contains(c.id)) throw Error(ErrorKind::DuplicateConcept, c.id.path);
    if (!c.parent) c.parent = c.id.structural_parent();
    if (!c.parent || !concepts_.contains(*c.parent)) {
      throw Error(ErrorKind::UnknownParent, c.parent ? c.parent->path : c.id.path);
    }
    if (c.parent != c.id.structural_parent()) {
      throw Error(ErrorKind::ValidationError, "parent of " + c.id.path + " must be its path prefix");
    }
    Ontology next = *this;
    next.concepts_.emplace(c.id, std::move(c));
    return next;
  }

  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] std::string serialize() const { return to_json().dump(2); }

  static Ontology from_json(const nlohmann::json& doc);
  static Ontology load(std::string_view text);

  bool operator==(const Ontology&) const = default;

 private:
  void validate() const;

  std::map<ConceptId, Concept> concepts_;
  std::map<std::string, RelationType> relations_;
  std::map<std::string, EventKind> events_;
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorKind::ParseError, std::string(where) + " is missing \"" + key + "\"");
  }
  return obj.at(key);
}

inline std::string require_string(const nlohmann::json& obj, const char* key, const char* where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) throw Error(ErrorKind::ParseError, std::string(where) + "." + key + " must be a string");
  return v.get<std::string>();
}

inline std::string optional_string(const nlohmann::json& obj, const char* key, const char* where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return {};
  if (!obj.at(key).is_string()) throw Error(ErrorKind::ParseError, std::string(where) + "." + key + " must be a string");
  return obj.at(key).get<std::string>();
}

inline const nlohmann::json& optional_array(const nlohmann::json& obj, const char* key, const char* where) {
  static const nlohmann::json empty = nlohmann::json::array();
  if (!obj.contains(key)) return empty;
  const auto& v = obj.at(key);
  if (!v.is_array()) throw Error(ErrorKind::ParseError, std::string(where) + "." + key + " must be an array");
  return v;
}

}  // namespace detail

inline nlohmann::json Ontology::to_json() const {
  using nlohmann::json;
  json doc;
  json concepts = json::array();
  for (const auto& [id, c] : concepts_) {
    json j{{"id", id.path}, {"label", c.label}};
    j["parent"] = c.parent ? json(c.parent->path) : json(nullptr);
    concepts.push_back(std::move(j));
  }
  json relations = json::array();
  for (const auto& [id, r] : relations_) {
    json rules = json::array();
    for (const auto& b : r.rule_bindings) rules.push_back(std::string(rule_name(b.kind)));
    json j{{"id", r.id},
           {"label", r.label},
           {"subject", r.subject_concept.path},
           {"object", r.object_concept.path},
           {"rules", std::move(rules)}};
    if (r.companion) j["companion"] = *r.companion;
    if (!r.messages.empty()) j["messages"] = r.messages;
    relations.push_back(std::move(j));
  }
  json events = json::array();
  for (const auto& [id, e] : events_) events.push_back(json{{"id", e.id}, {"label", e.label}});
  doc["concepts"] = std::move(concepts);
  doc["relations"] = std::move(relations);
  doc["events"] = std::move(events);
  return doc;
}

inline Ontology Ontology::from_json(const nlohmann::json& doc) {
  using detail::optional_array;
  using detail::optional_string;
  using detail::require_string;
  if (!doc.is_object()) throw Error(ErrorKind::ParseError, "ontology document must be a JSON object");
  if (!doc.contains("concepts")) throw Error(ErrorKind::ParseError, "ontology document has no \"concepts\"");

  Ontology o;
  for (const auto& jc : optional_array(doc, "concepts", "ontology")) {
    Concept c;
    c.id = ConceptId(require_string(jc, "id", "concept"));
    c.label = optional_string(jc, "label", "concept");
    auto parent = optional_string(jc, "parent", "concept");
    if (!parent.empty()) c.parent = ConceptId(parent);
    if (!o.concepts_.emplace(c.id, c).second) {
      throw Error(ErrorKind::ValidationError, "duplicate concept " + c.id.path);
    }
  }
  for (const auto& jr : optional_array(doc, "relations", "ontology")) {
    RelationType r;
    r.id = require_string(jr, "id", "relation");
    r.label = optional_string(jr, "label", "relation");
    r.subject_concept = ConceptId(require_string(jr, "subject", "relation"));
    r.object_concept = ConceptId(require_string(jr, "object", "relation"));
    auto companion = optional_string(jr, "companion", "relation");
    if (!companion.empty()) r.companion = companion;
    for (const auto& rule : optional_array(jr, "rules", "relation")) {
      if (!rule.is_string()) throw Error(ErrorKind::ParseError, "rule names must be strings");
      auto kind = parse_rule_name(rule.get<std::string>());
      if (!kind) throw Error(ErrorKind::ParseError, "unknown rule \"" + rule.get<std::string>() + "\"");
      RuleBinding b{*kind, needs_companion(*kind) ? r.companion : std::nullopt};
      if (r.has(*kind)) throw Error(ErrorKind::ValidationError, "rule listed twice on " + r.id);
      r.rule_bindings.push_back(b);
    }
    std::sort(r.rule_bindings.begin(), r.rule_bindings.end());
    if (jr.contains("messages")) {
      const auto& jm = jr.at("messages");
      if (!jm.is_object()) throw Error(ErrorKind::ParseError, "relation.messages must be an object");
      for (const auto& [key, value] : jm.items()) {
        if (!value.is_string()) throw Error(ErrorKind::ParseError, "message templates must be strings");
        r.messages[key] = value.get<std::string>();
      }
    }
    if (!o.relations_.emplace(r.id, r).second) {
      throw Error(ErrorKind::ValidationError, "duplicate relation type " + r.id);
    }
  }
  for (const auto& je : optional_array(doc, "events", "ontology")) {
    EventKind e{require_string(je, "id", "event"), optional_string(je, "label", "event")};
    if (!o.events_.emplace(e.id, e).second) {
      throw Error(ErrorKind::ValidationError, "duplicate event kind " + e.id);
    }
  }
  o.validate();
  return o;
}

inline Ontology Ontology::load(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  return from_json(doc);
}

inline void Ontology::validate() const {
  const ConceptId root{std::string(ConceptId::root_path)};
  auto root_it = concepts_.find(root);
  if (root_it == concepts_.end()) throw Error(ErrorKind::ValidationError, "missing root concept /Thing");
  if (root_it->second.parent) throw Error(ErrorKind::ValidationError, "/Thing must not have a parent");

  for (const auto& [id, c] : concepts_) {
    if (!id.well_formed()) throw Error(ErrorKind::ValidationError, "malformed concept id " + id.path);
    if (id.is_root()) continue;
    if (!c.parent) throw Error(ErrorKind::ValidationError, id.path + " has no parent");
    if (!concepts_.contains(*c.parent)) {
      throw Error(ErrorKind::ValidationError, "dangling parent " + c.parent->path + " of " + id.path);
    }
    // Parent must be the path prefix, which also rules out cycles.
    if (c.parent != id.structural_parent()) {
      throw Error(ErrorKind::ValidationError, "parent of " + id.path + " must be its path prefix");
    }
  }

  for (const auto& [id, r] : relations_) {
    if (id.empty()) throw Error(ErrorKind::ValidationError, "empty relation type id");
    if (!concepts_.contains(r.subject_concept)) {
      throw Error(ErrorKind::ValidationError, id + " subject concept " + r.subject_concept.path + " is unknown");
    }
    if (!concepts_.contains(r.object_concept)) {
      throw Error(ErrorKind::ValidationError, id + " object concept " + r.object_concept.path + " is unknown");
    }
    bool wants_companion = std::any_of(r.rule_bindings.begin(), r.rule_bindings.end(),
                                       [](const RuleBinding& b) { return needs_companion(b.kind); });
    if (wants_companion && !r.companion) {
      throw Error(ErrorKind::ValidationError, id + " has a companion rule but no companion");
    }
    if (r.companion) {
      if (!relations_.contains(*r.companion)) {
        throw Error(ErrorKind::ValidationError, id + " companion " + *r.companion + " is unknown");
      }
      // Co-occurrence requires r' != r; termination and irreversibility may
      // pair a relation with itself (marriage).
      if (r.has(ConstraintKind::AsymmetricCoOccurrence) && *r.companion == id) {
        throw Error(ErrorKind::ValidationError, id + " co-occurrence companion must differ from the relation");
      }
    }
  }
}

}  // namespace metaonce
