#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "metaonce/error.hpp"
#include "metaonce/ontology.hpp"
#include "metaonce/world.hpp"

namespace metaonce {

enum class EventType {
  SceneCreated,
  EntityAdded,
  RelationEstablished,
  RelationCancelled,
  DerivedRelationEstablished,
  DerivedRelationCancelled,
  BanRecorded,
};

inline std::string_view to_string(EventType t) {
  switch (t) {
    case EventType::SceneCreated: return "SceneCreated";
    case EventType::EntityAdded: return "EntityAdded";
    case EventType::RelationEstablished: return "RelationEstablished";
    case EventType::RelationCancelled: return "RelationCancelled";
    case EventType::DerivedRelationEstablished: return "DerivedRelationEstablished";
    case EventType::DerivedRelationCancelled: return "DerivedRelationCancelled";
    case EventType::BanRecorded: return "BanRecorded";
  }
  return "";
}

inline std::optional<EventType> parse_event_type(std::string_view s) {
  for (auto t : {EventType::SceneCreated, EventType::EntityAdded, EventType::RelationEstablished,
                 EventType::RelationCancelled, EventType::DerivedRelationEstablished,
                 EventType::DerivedRelationCancelled, EventType::BanRecorded}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

/// One occurrence in the world's history. The payload is kind-specific:
///   SceneCreated        {id, name, allowed_relations}
///   EntityAdded         {id, name, concept}
///   Relation*/Derived*  {subject, relation, object[, actor]}
///   BanRecorded         {pair: [a, b], relations: [...]}
struct Event {
  Seq seq = 0;
  EventType kind{};
  std::optional<SceneId> scene;
  nlohmann::json payload = nlohmann::json::object();
  std::optional<Seq> cause;
  std::optional<std::string> ts;  // wall clock, metadata only

  [[nodiscard]] bool is_relation_event() const {
    return kind == EventType::RelationEstablished || kind == EventType::RelationCancelled ||
           kind == EventType::DerivedRelationEstablished || kind == EventType::DerivedRelationCancelled;
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j{{"seq", seq}, {"kind", std::string(to_string(kind))}, {"payload", payload}};
    if (scene) j["scene"] = *scene;
    if (cause) j["cause"] = *cause;
    if (ts) j["ts"] = *ts;
    return j;
  }

  static Event from_json(const nlohmann::json& j) {
    auto bad = [&](const std::string& why) { return Error(ErrorKind::CorruptLog, why + ": " + j.dump()); };
    if (!j.is_object()) throw bad("event record is not an object");
    Event e;
    if (!j.contains("seq") || !j["seq"].is_number_unsigned()) throw bad("missing or invalid seq");
    e.seq = j["seq"].get<Seq>();
    if (!j.contains("kind") || !j["kind"].is_string()) throw bad("missing kind");
    auto kind = parse_event_type(j["kind"].get<std::string>());
    if (!kind) throw bad("unknown event kind");
    e.kind = *kind;
    if (!j.contains("payload") || !j["payload"].is_object()) throw bad("missing payload");
    e.payload = j["payload"];
    if (j.contains("scene")) {
      if (!j["scene"].is_string()) throw bad("invalid scene");
      e.scene = j["scene"].get<std::string>();
    }
    if (j.contains("cause")) {
      if (!j["cause"].is_number_unsigned()) throw bad("invalid cause");
      e.cause = j["cause"].get<Seq>();
    }
    if (j.contains("ts") && j["ts"].is_string()) e.ts = j["ts"].get<std::string>();
    return e;
  }

  bool operator==(const Event&) const = default;
};

// ---- event constructors ----------------------------------------------------

inline Event scene_created_event(Seq seq, const Scene& s) {
  Event e;
  e.seq = seq;
  e.kind = EventType::SceneCreated;
  e.scene = s.id;
  e.payload = {{"id", s.id}, {"name", s.name}, {"allowed_relations", s.allowed_relations}};
  return e;
}

inline Event entity_added_event(Seq seq, const Entity& ent, const SceneId& scene) {
  Event e;
  e.seq = seq;
  e.kind = EventType::EntityAdded;
  e.scene = scene;
  e.payload = entity_json(ent);
  return e;
}

inline Event relation_event(Seq seq, EventType kind, const SceneId& scene, const EntityId& subject,
                            const RelationId& relation, const EntityId& object,
                            std::optional<Seq> cause = std::nullopt,
                            std::optional<EntityId> actor = std::nullopt) {
  Event e;
  e.seq = seq;
  e.kind = kind;
  e.scene = scene;
  e.payload = {{"subject", subject}, {"relation", relation}, {"object", object}};
  if (actor) e.payload["actor"] = *actor;
  e.cause = cause;
  return e;
}

inline Event ban_event(Seq seq, const BanRecord& ban, Seq cause, std::optional<SceneId> scene = std::nullopt) {
  Event e;
  e.seq = seq;
  e.kind = EventType::BanRecorded;
  e.scene = std::move(scene);
  e.payload = {{"pair", {ban.pair.first, ban.pair.second}}, {"relations", ban.relations}};
  e.cause = cause;
  return e;
}

namespace detail {

inline std::string payload_string(const Event& e, const char* key) {
  if (!e.payload.contains(key) || !e.payload[key].is_string()) {
    throw Error(ErrorKind::CorruptLog, "event " + std::to_string(e.seq) + " payload lacks \"" + key + "\"");
  }
  return e.payload[key].get<std::string>();
}

inline const SceneId& event_scene(const Event& e) {
  if (!e.scene) throw Error(ErrorKind::CorruptLog, "event " + std::to_string(e.seq) + " has no scene");
  return *e.scene;
}

}  // namespace detail

/// Folds one historical event into the world. No rule checks are made; the
/// log holds facts. Sequence continuity is enforced.
inline void apply_event(WorldState& world, const Ontology& ontology, const Event& e) {
  using detail::payload_string;
  if (e.seq != world.last_event + 1) {
    throw Error(ErrorKind::CorruptLog, "expected seq " + std::to_string(world.last_event + 1) + ", got " +
                                           std::to_string(e.seq));
  }
  if (e.cause && *e.cause >= e.seq) {
    throw Error(ErrorKind::CorruptLog, "event " + std::to_string(e.seq) + " has cause not before it");
  }
  switch (e.kind) {
    case EventType::SceneCreated: {
      Scene s{payload_string(e, "id"), payload_string(e, "name"), {}};
      if (e.payload.contains("allowed_relations")) {
        s.allowed_relations = e.payload["allowed_relations"].get<std::set<RelationId>>();
      }
      world.create_scene(ontology, std::move(s));
      break;
    }
    case EventType::EntityAdded: {
      Entity ent{payload_string(e, "id"), payload_string(e, "name"), ConceptId(payload_string(e, "concept"))};
      world.add_entity(ontology, ent, detail::event_scene(e));
      break;
    }
    case EventType::RelationEstablished:
    case EventType::DerivedRelationEstablished: {
      Edge edge{payload_string(e, "subject"), payload_string(e, "relation"), payload_string(e, "object"),
                detail::event_scene(e), e.seq, std::nullopt};
      if (e.kind == EventType::DerivedRelationEstablished) {
        if (!e.cause) throw Error(ErrorKind::CorruptLog, "derived event " + std::to_string(e.seq) + " has no cause");
        edge.derived_from = e.cause;
      }
      world.scene(detail::event_scene(e)).insert_edge(std::move(edge));
      break;
    }
    case EventType::RelationCancelled:
    case EventType::DerivedRelationCancelled:
      world.scene(detail::event_scene(e))
          .remove_edge(payload_string(e, "subject"), payload_string(e, "relation"), payload_string(e, "object"));
      break;
    case EventType::BanRecorded: {
      const auto& pair = e.payload.value("pair", nlohmann::json());
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
        throw Error(ErrorKind::CorruptLog, "ban event " + std::to_string(e.seq) + " has a malformed pair");
      }
      BanRecord ban;
      ban.pair = BanRecord::make_pair(pair[0].get<std::string>(), pair[1].get<std::string>());
      ban.relations = e.payload.value("relations", nlohmann::json::array()).get<std::set<RelationId>>();
      ban.origin_event = e.seq;
      if (ban.relations.empty() || !world.entities.contains(ban.pair.first) ||
          !world.entities.contains(ban.pair.second)) {
        throw Error(ErrorKind::CorruptLog, "ban event " + std::to_string(e.seq) + " is unresolvable");
      }
      world.bans.push_back(std::move(ban));
      break;
    }
  }
  world.last_event = e.seq;
}

/// Append-only, gapless, optionally file-backed event sequence.
class EventLog {
 public:
  static constexpr const char* file_name = "events.log";

  EventLog() = default;

  /// Opens (creating if needed) <dir>/events.log and loads its records. A
  /// torn final line, left by a crash during a write, is truncated away.
  static EventLog open(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::StorageError, "cannot create " + dir.string() + ": " + ec.message());
    EventLog log;
    log.path_ = dir / file_name;

    std::string content;
    if (std::filesystem::exists(log.path_)) {
      std::ifstream in(log.path_, std::ios::binary);
      if (!in) throw Error(ErrorKind::StorageError, "cannot read " + log.path_.string());
      std::ostringstream ss;
      ss << in.rdbuf();
      content = ss.str();
    }
    auto complete = content.rfind('\n');
    std::size_t keep = complete == std::string::npos ? 0 : complete + 1;

    std::size_t pos = 0;
    while (pos < keep) {
      auto end = content.find('\n', pos);
      auto line = std::string_view(content).substr(pos, end - pos);
      pos = end + 1;
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::CorruptLog, e.what());
      }
      auto ev = Event::from_json(j);
      if (ev.seq != log.events_.size() + 1) {
        throw Error(ErrorKind::CorruptLog, "gap in event log at seq " + std::to_string(ev.seq));
      }
      if (ev.cause && *ev.cause >= ev.seq) throw Error(ErrorKind::CorruptLog, "cause not before seq " + std::to_string(ev.seq));
      log.events_.push_back(std::move(ev));
    }

    log.fd_ = ::open(log.path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (log.fd_ < 0) throw Error(ErrorKind::StorageError, "cannot open " + log.path_.string() + ": " + std::strerror(errno));
    if (keep != content.size() && ::ftruncate(log.fd_, static_cast<off_t>(keep)) != 0) {
      throw Error(ErrorKind::StorageError, "cannot truncate torn tail: " + std::string(std::strerror(errno)));
    }
    return log;
  }

  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;
  EventLog(EventLog&& other) noexcept { *this = std::move(other); }
  EventLog& operator=(EventLog&& other) noexcept {
    if (this != &other) {
      close();
      events_ = std::move(other.events_);
      path_ = std::move(other.path_);
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  ~EventLog() { close(); }

  [[nodiscard]] std::span<const Event> events() const { return events_; }
  [[nodiscard]] std::size_t size() const { return events_.size(); }
  [[nodiscard]] Seq last_seq() const { return events_.empty() ? 0 : events_.back().seq; }
  [[nodiscard]] bool durable() const { return fd_ >= 0; }
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

  /// Writes the batch with a single write() and fsyncs before extending the
  /// in-memory sequence. Throws StorageError on I/O failure, leaving the log
  /// unchanged.
  void append(std::span<const Event> batch) {
    if (batch.empty()) return;
    Seq expected = last_seq() + 1;
    for (const auto& e : batch) {
      if (e.seq != expected++) {
        throw Error(ErrorKind::PreconditionViolation, "batch does not continue the log at seq " + std::to_string(e.seq));
      }
      if (e.cause && *e.cause >= e.seq) {
        throw Error(ErrorKind::PreconditionViolation, "event " + std::to_string(e.seq) + " has cause not before it");
      }
    }
    if (fd_ >= 0) {
      std::string buf;
      for (const auto& e : batch) {
        buf += e.to_json().dump();
        buf += '\n';
      }
      write_all(buf);
    }
    events_.insert(events_.end(), batch.begin(), batch.end());
  }

 private:
  void write_all(const std::string& buf) {
    const char* p = buf.data();
    std::size_t left = buf.size();
    while (left > 0) {
      auto n = ::write(fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorKind::StorageError, "write failed: " + std::string(std::strerror(errno)));
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw Error(ErrorKind::StorageError, "fsync failed: " + std::string(std::strerror(errno)));
  }

  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  std::vector<Event> events_;
  std::filesystem::path path_;
  int fd_ = -1;
};

/// Rebuilds the world by folding events in order. Any failure is CorruptLog.
inline WorldState replay(std::span<const Event> events, const Ontology& ontology) {
  WorldState world;
  for (const auto& e : events) {
    try {
      apply_event(world, ontology, e);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::CorruptLog) throw;
      throw Error(ErrorKind::CorruptLog, "event " + std::to_string(e.seq) + ": " + err.what());
    }
  }
  return world;
}

inline WorldState replay(const EventLog& log, const Ontology& ontology) { return replay(log.events(), ontology); }

struct HistoryFilter {
  std::optional<EntityId> subject;
  std::optional<EntityId> object;
  std::optional<RelationId> relation;
};

namespace detail {

// Entities an event is "about": (subject, object) for relation events, the
// pair for bans, the entity itself for EntityAdded.
inline std::pair<std::optional<EntityId>, std::optional<EntityId>> event_endpoints(const Event& e) {
  auto str = [&](const char* key) -> std::optional<EntityId> {
    if (e.payload.contains(key) && e.payload[key].is_string()) return e.payload[key].get<std::string>();
    return std::nullopt;
  };
  if (e.is_relation_event()) return {str("subject"), str("object")};
  if (e.kind == EventType::BanRecorded && e.payload.contains("pair") && e.payload["pair"].size() == 2) {
    return {e.payload["pair"][0].get<std::string>(), e.payload["pair"][1].get<std::string>()};
  }
  if (e.kind == EventType::EntityAdded) return {str("id"), std::nullopt};
  return {std::nullopt, std::nullopt};
}

inline bool event_mentions_relation(const Event& e, const RelationId& r) {
  if (e.is_relation_event()) return e.payload.value("relation", "") == r;
  if (e.kind == EventType::BanRecorded) {
    for (const auto& x : e.payload.value("relations", nlohmann::json::array())) {
      if (x == r) return true;
    }
  }
  return false;
}

}  // namespace detail

/// Events matching every provided filter, in seq order. When both subject and
/// object are given they match as an unordered pair.
inline std::vector<Event> query_history(std::span<const Event> events, const HistoryFilter& filter) {
  std::vector<Event> out;
  for (const auto& e : events) {
    if (filter.relation && !detail::event_mentions_relation(e, *filter.relation)) continue;
    auto [a, b] = detail::event_endpoints(e);
    if (filter.subject && filter.object) {
      bool forward = a == filter.subject && b == filter.object;
      bool backward = a == filter.object && b == filter.subject;
      if (!forward && !backward) continue;
    } else if (filter.subject) {
      if (e.kind == EventType::BanRecorded ? (a != filter.subject && b != filter.subject) : a != filter.subject) continue;
    } else if (filter.object) {
      if (e.kind == EventType::BanRecorded ? (a != filter.object && b != filter.object) : b != filter.object) continue;
    }
    out.push_back(e);
  }
  return out;
}

inline std::vector<Event> query_history(const EventLog& log, const HistoryFilter& filter) {
  return query_history(log.events(), filter);
}

}  // namespace metaonce
