#pragma once

#include <string>

#include <httplib.h>

#include "metaonce/service.hpp"

namespace metaonce {

/// Registers the JSON endpoints on an httplib server:
///   POST /login      {entity}
///   POST /actions    {token, verb, relation, object, scene, subject?}
///   GET  /scenes     list of scenes
///   GET  /scenes/:id scene snapshot
///   POST /merge      {scenes: [...]}
///   POST /analytics  {scene | scenes, query, params?, weights?, directed?}
///   GET  /history    ?subject=&object=&relation=
///   GET  /ontology
inline void bind_routes(httplib::Server& server, Service& service) {
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json; charset=utf-8");
  };

  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Post("/login", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.handle_login(req.body));
  });
  server.Post("/actions", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.handle_action(req.body));
  });
  server.Get("/scenes", [&service, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, service.handle_list_scenes());
  });
  server.Get(R"(/scenes/([^/]+))", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.handle_get_scene(req.matches[1]));
  });
  server.Post("/merge", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.handle_merge(req.body));
  });
  server.Post("/analytics", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.handle_analytics(req.body));
  });
  server.Get("/history", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    HistoryFilter filter;
    if (req.has_param("subject")) filter.subject = req.get_param_value("subject");
    if (req.has_param("object")) filter.object = req.get_param_value("object");
    if (req.has_param("relation")) filter.relation = req.get_param_value("relation");
    reply(res, service.handle_history(filter));
  });
  server.Get("/ontology", [&service, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, service.handle_ontology());
  });
}

}  // namespace metaonce
