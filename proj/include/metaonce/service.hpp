#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "metaonce/analytics.hpp"
#include "metaonce/engine.hpp"
#include "metaonce/error.hpp"
#include "metaonce/merge.hpp"

namespace metaonce {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "data/world";
  std::string ontology_path;  // empty: bundled vocabulary
  std::string seed_path;
  std::size_t max_hops = 8;
  double core_threshold = 0.5;
};

struct Session {
  std::string token;
  EntityId entity;
  Seq created = 0;
};

/// Transport-independent service responses: status code plus JSON body.
struct Response {
  int status = 200;
  std::string body;

  static Response ok(const nlohmann::json& j) { return {200, j.dump()}; }
};

inline int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownScene:
    case ErrorKind::UnknownEntity:
    case ErrorKind::UnknownVertex:
    case ErrorKind::UnknownConcept:
    case ErrorKind::UnknownRelationType:
      return 404;
    case ErrorKind::InvalidSession:
      return 401;
    case ErrorKind::StorageError:
    case ErrorKind::CorruptLog:
      return 500;
    default:
      return 400;
  }
}

inline Response error_response(const Error& e) {
  return {http_status(e.kind()), nlohmann::json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}.dump()};
}

/// Session handling and JSON request handlers behind the HTTP routes.
class Service {
 public:
  Service(Engine& engine, ServiceConfig config = {}) : engine_(engine), config_(std::move(config)) {}

  [[nodiscard]] Engine& engine() { return engine_; }
  [[nodiscard]] const ServiceConfig& config() const { return config_; }

  Session login(const EntityId& entity) {
    auto world = engine_.snapshot();
    if (world->find_entity(entity) == nullptr) throw Error(ErrorKind::UnknownEntity, entity);
    std::lock_guard lock(mutex_);
    Session s{new_token(), entity, world->last_event};
    sessions_.emplace(s.token, s);
    return s;
  }

  [[nodiscard]] Session session(const std::string& token) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(token);
    if (it == sessions_.end()) throw Error(ErrorKind::InvalidSession, "unknown session token");
    return it->second;
  }

  // ---- JSON handlers ------------------------------------------------------
  // Each takes the parsed request body and returns a Response; errors become
  // {"error": kind, "message": text} with a matching status.

  Response handle_login(const std::string& body) {
    return guarded([&] {
      auto j = parse_body(body);
      auto s = login(require_string(j, "entity"));
      return Response::ok({{"token", s.token}, {"entity", s.entity}, {"created", s.created}});
    });
  }

  /// The session entity is the actor. A body "actor" naming someone else is
  /// refused as NOT_AUTHORIZED without touching the world.
  Response handle_action(const std::string& body) {
    return guarded([&] {
      auto j = parse_body(body);
      auto s = session(require_string(j, "token"));
      ActionRequest req;
      req.actor = s.entity;
      auto verb = parse_verb(require_string(j, "verb"));
      if (!verb) throw Error(ErrorKind::InvalidArgument, "verb must be \"establish\" or \"cancel\"");
      req.verb = *verb;
      req.subject = j.contains("subject") ? require_string(j, "subject") : s.entity;
      req.relation = require_string(j, "relation");
      req.object = require_string(j, "object");
      req.scene = require_string(j, "scene");

      ActionOutcome outcome;
      if (j.contains("actor") && j["actor"] != s.entity) {
        auto world = engine_.snapshot();
        outcome.decision = detail::verdict(req, ReasonCode::NOT_AUTHORIZED);
        outcome.decision.message = render_rejection_message(outcome.decision, *world, engine_.ontology());
      } else {
        outcome = engine_.submit(req);
      }
      auto out = decision_json(outcome.decision);
      out["added"] = edges_json(outcome.added);
      out["removed"] = edges_json(outcome.removed);
      return Response::ok(out);
    });
  }

  Response handle_get_scene(const SceneId& id) {
    return guarded([&] { return Response::ok(export_scene(*engine_.snapshot(), id)); });
  }

  Response handle_list_scenes() {
    return guarded([&] {
      auto world = engine_.snapshot();
      nlohmann::json scenes = nlohmann::json::array();
      for (const auto& [id, g] : world->scenes) {
        scenes.push_back({{"id", id}, {"name", g.scene().name}, {"allowed_relations", g.scene().allowed_relations}});
      }
      return Response::ok({{"scenes", scenes}});
    });
  }

  Response handle_merge(const std::string& body) {
    return guarded([&] {
      auto j = parse_body(body);
      return Response::ok(export_merged(merge_scenes(*engine_.snapshot(), scene_list(j))));
    });
  }

  Response handle_analytics(const std::string& body) {
    return guarded([&] { return Response::ok(run_analytics(parse_body(body))); });
  }

  Response handle_history(const HistoryFilter& filter) {
    return guarded([&] {
      nlohmann::json events = nlohmann::json::array();
      for (const auto& e : engine_.history(filter)) events.push_back(e.to_json());
      return Response::ok({{"events", events}});
    });
  }

  Response handle_ontology() {
    return guarded([&] { return Response{200, engine_.ontology().to_json().dump()}; });
  }

  /// Body: {"scene": id} or {"scenes": [ids]}, "query": name, "params": {...},
  /// optional "weights": {relation: weight} and "directed": bool.
  nlohmann::json run_analytics(const nlohmann::json& j) {
    namespace an = analytics;
    auto world = engine_.snapshot();
    an::WeightMap weights;
    if (j.contains("weights")) weights = j["weights"].get<an::WeightMap>();
    bool directed = j.value("directed", true);
    auto query = require_string(j, "query");
    static const std::set<std::string> known{"traverse",         "sssp",
                                             "shortest_path",    "all_simple_paths",
                                             "evaluate_path",    "articulation_points",
                                             "core_vertices"};
    if (!known.contains(query)) throw Error(ErrorKind::UnknownQuery, query);

    an::AnalysisGraph g = j.contains("scene")
                              ? an::AnalysisGraph::from_scene(world->scene(require_string(j, "scene")), weights, directed)
                              : an::AnalysisGraph::from_merged(merge_scenes(*world, scene_list(j)), weights, directed);
    const nlohmann::json params = j.value("params", nlohmann::json::object());
    nlohmann::json out{{"query", query}};

    if (query == "traverse") {
      auto strategy = params.value("strategy", "bfs");
      if (strategy != "bfs" && strategy != "dfs") throw Error(ErrorKind::InvalidArgument, "strategy must be bfs or dfs");
      out["order"] = an::traverse(g, require_string(params, "start"),
                                  strategy == "bfs" ? an::Strategy::BreadthFirst : an::Strategy::DepthFirst);
    } else if (query == "sssp") {
      nlohmann::json dist = nlohmann::json::object();
      for (const auto& [v, r] : an::sssp(g, require_string(params, "source"))) {
        dist[v] = {{"distance", r.distance}, {"predecessor", r.predecessor ? nlohmann::json(*r.predecessor) : nullptr}};
      }
      out["distances"] = dist;
    } else if (query == "shortest_path") {
      auto p = an::shortest_path(g, require_string(params, "source"), require_string(params, "target"));
      out["path"] = p ? path_json(*p) : nlohmann::json(nullptr);
    } else if (query == "all_simple_paths") {
      auto max_hops = params.value("max_hops", config_.max_hops);
      nlohmann::json paths = nlohmann::json::array();
      for (const auto& p : an::all_simple_paths(g, require_string(params, "source"), require_string(params, "target"),
                                                max_hops)) {
        paths.push_back(path_json(p));
      }
      out["paths"] = paths;
    } else if (query == "evaluate_path") {
      an::Path p;
      if (!params.contains("edges") || !params["edges"].is_array()) {
        throw Error(ErrorKind::InvalidArgument, "evaluate_path needs params.edges");
      }
      for (const auto& step : params["edges"]) {
        p.edges.push_back({step.value("relation", ""), step.value("weight", 1.0)});
      }
      p.hops = p.edges.size();
      out["score"] = score_json(an::evaluate_path(p));
    } else if (query == "articulation_points") {
      out["vertices"] = an::articulation_points(g);
    } else {
      out["vertices"] = an::core_vertices(g, params.value("threshold", config_.core_threshold));
    }
    return out;
  }

  static nlohmann::json path_json(const analytics::Path& p) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& step : p.edges) edges.push_back({{"relation", step.relation}, {"weight", step.weight}});
    return {{"vertices", p.vertices},
            {"edges", edges},
            {"total_weight", p.total_weight},
            {"hops", p.hops},
            {"score", score_json(analytics::evaluate_path(p))}};
  }

 private:
  static nlohmann::json score_json(const analytics::PathScore& s) {
    return {{"total_weight", s.total_weight}, {"hops", s.hops}, {"mean_edge_weight", s.mean_edge_weight}};
  }

  static nlohmann::json edges_json(const std::vector<Edge>& edges) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : edges) {
      auto j = edge_json(e);
      j["scene"] = e.scene;
      out.push_back(std::move(j));
    }
    return out;
  }

  static nlohmann::json parse_body(const std::string& body) {
    try {
      auto j = nlohmann::json::parse(body.empty() ? "{}" : body);
      if (!j.is_object()) throw Error(ErrorKind::ParseError, "request body must be a JSON object");
      return j;
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::ParseError, e.what());
    }
  }

  static std::string require_string(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw Error(ErrorKind::InvalidArgument, std::string("missing string field \"") + key + "\"");
    }
    return j[key].get<std::string>();
  }

  static std::vector<SceneId> scene_list(const nlohmann::json& j) {
    if (!j.contains("scenes") || !j["scenes"].is_array()) {
      throw Error(ErrorKind::InvalidArgument, "missing array field \"scenes\"");
    }
    std::vector<SceneId> out;
    for (const auto& s : j["scenes"]) {
      if (!s.is_string()) throw Error(ErrorKind::InvalidArgument, "scene ids must be strings");
      out.push_back(s.get<std::string>());
    }
    return out;
  }

  template <typename F>
  static Response guarded(F&& f) {
    try {
      return f();
    } catch (const Error& e) {
      return error_response(e);
    } catch (const nlohmann::json::exception& e) {
      return error_response(Error(ErrorKind::InvalidArgument, e.what()));
    }
  }

  // Caller holds mutex_.
  std::string new_token() {
    static constexpr char hex[] = "0123456789abcdef";
    std::string token;
    do {
      token.clear();
      for (int i = 0; i < 32; ++i) token += hex[rng_() & 0xF];
    } while (sessions_.contains(token));
    return token;
  }

  Engine& engine_;
  ServiceConfig config_;
  std::map<std::string, Session> sessions_;
  std::mt19937_64 rng_{std::random_device{}()};
  mutable std::mutex mutex_;
};

}  // namespace metaonce
