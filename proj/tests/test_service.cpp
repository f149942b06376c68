#include <thread>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "metaonce/http.hpp"

using namespace metaonce;
using nlohmann::json;

namespace {

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    engine.run_script(fixtures::golden_script());
    fixtures::extend_for_rule_scenarios(engine);
  }

  std::string token_for(const std::string& entity) {
    auto r = service.handle_login(json{{"entity", entity}}.dump());
    EXPECT_EQ(r.status, 200) << r.body;
    return json::parse(r.body)["token"].get<std::string>();
  }

  json act(const std::string& token, json body) {
    body["token"] = token;
    auto r = service.handle_action(body.dump());
    EXPECT_EQ(r.status, 200) << r.body;
    return json::parse(r.body);
  }

  Engine engine{fixtures::ontology()};
  Service service{engine};
};

json marry(const std::string& object) {
  return {{"verb", "establish"}, {"relation", "MarryAction"}, {"object", object}, {"scene", "interstellar-war"}};
}

}  // namespace

TEST_F(ServiceTest, LoginRequiresKnownEntityAndIssuesDistinctTokens) {
  auto bad = service.handle_login(R"({"entity": "zz"})");
  EXPECT_EQ(bad.status, 404);
  EXPECT_EQ(json::parse(bad.body)["error"], "UnknownEntity");
  EXPECT_EQ(service.handle_login("not json").status, 400);
  auto a = token_for("a6");
  auto b = token_for("a6");
  EXPECT_NE(a, b);
  EXPECT_EQ(a.size(), 32u);
  EXPECT_EQ(service.session(a).entity, "a6");
}

TEST_F(ServiceTest, ActionsRunThroughTheRuleController) {
  auto iron = token_for("a6");
  auto spider = token_for("a5");
  auto ok = act(iron, marry("a3"));
  EXPECT_EQ(ok["outcome"], "Accepted");
  EXPECT_EQ(ok["added"].size(), 2u);
  EXPECT_EQ(ok["added"][0]["scene"], "interstellar-war");

  auto no = act(spider, marry("a3"));
  EXPECT_EQ(no["outcome"], "Rejected");
  EXPECT_EQ(no["reason_code"], "EXCLUSIVE_CONFLICT");
  EXPECT_EQ(no["message"], "Sorry, you can't marry this person because Iron Man is already married to this person");
  EXPECT_EQ(no["conflicting_edge"]["subject"], "a6");
  EXPECT_TRUE(no["added"].empty());
}

TEST_F(ServiceTest, ActorIsTheSessionEntity) {
  auto spider = token_for("a5");
  auto before = engine.event_count();
  auto body = marry("a3");
  body["actor"] = "a6";
  body["subject"] = "a6";
  auto r = act(spider, body);
  EXPECT_EQ(r["reason_code"], "NOT_AUTHORIZED");
  EXPECT_EQ(engine.event_count(), before);
  // Acting for someone else's entity is equally refused by delegation.
  auto r2 = act(spider, {{"verb", "establish"}, {"subject", "a6"}, {"relation", "MarryAction"}, {"object", "a3"},
                         {"scene", "interstellar-war"}});
  EXPECT_EQ(r2["reason_code"], "NOT_AUTHORIZED");
}

TEST_F(ServiceTest, SessionAndBodyErrors) {
  auto r = service.handle_action(R"({"token": "nope", "verb": "establish", "relation": "MarryAction",
                                     "object": "a3", "scene": "interstellar-war"})");
  EXPECT_EQ(r.status, 401);
  auto t = token_for("a6");
  auto bad_verb = service.handle_action(json{{"token", t}, {"verb", "update"}, {"relation", "MarryAction"},
                                             {"object", "a3"}, {"scene", "interstellar-war"}}
                                            .dump());
  EXPECT_EQ(bad_verb.status, 400);
  EXPECT_EQ(service.handle_action(json{{"token", t}}.dump()).status, 400);
}

TEST_F(ServiceTest, SceneSnapshotsAreDeterministic) {
  auto a = service.handle_get_scene("classroom");
  auto b = service.handle_get_scene("classroom");
  EXPECT_EQ(a.status, 200);
  EXPECT_EQ(a.body, b.body);
  auto j = json::parse(a.body);
  EXPECT_EQ(j["scenes"][0]["id"], "classroom");
  EXPECT_EQ(j["entities"].size(), 3u);
  EXPECT_EQ(service.handle_get_scene("nowhere").status, 404);
  auto list = json::parse(service.handle_list_scenes().body);
  EXPECT_EQ(list["scenes"].size(), 3u);
}

TEST_F(ServiceTest, MergeEndpoint) {
  auto r = service.handle_merge(R"({"scenes": ["interstellar-war", "classroom"]})");
  ASSERT_EQ(r.status, 200);
  auto j = json::parse(r.body);
  EXPECT_EQ(j["source_scenes"], json({"classroom", "interstellar-war"}));
  EXPECT_EQ(service.handle_merge(R"({"scenes": []})").status, 400);
  EXPECT_EQ(service.handle_merge(R"({"scenes": ["nowhere"]})").status, 404);
  EXPECT_EQ(service.handle_merge(R"({})").status, 400);
}

TEST_F(ServiceTest, AnalyticsEndpoint) {
  auto run = [&](json body) { return service.handle_analytics(body.dump()); };
  auto bfs = json::parse(run({{"scene", "interstellar-war"}, {"query", "traverse"}, {"params", {{"start", "a6"}}}}).body);
  EXPECT_EQ(bfs["order"], json({"a6", "a5", "c1", "d4"}));

  auto sp = json::parse(run({{"scenes", {"interstellar-war", "classroom"}},
                             {"query", "shortest_path"},
                             {"params", {{"source", "a6"}, {"target", "a3"}}}})
                            .body);
  EXPECT_EQ(sp["path"]["vertices"], json({"a6", "a5", "a3"}));
  EXPECT_EQ(sp["path"]["score"]["hops"], 2);

  auto none = json::parse(run({{"scene", "classroom"},
                               {"query", "shortest_path"},
                               {"params", {{"source", "a3"}, {"target", "a5"}}}})
                              .body);
  EXPECT_TRUE(none["path"].is_null());

  auto cut = json::parse(run({{"scenes", {"interstellar-war", "classroom"}}, {"query", "articulation_points"}}).body);
  EXPECT_EQ(cut["vertices"], json({"a5", "a6"}));

  auto eval = json::parse(
      run({{"scene", "classroom"},
           {"query", "evaluate_path"},
           {"params", {{"edges", {{{"relation", "r"}, {"weight", 1}}, {{"relation", "r"}, {"weight", 1.5}}}}}}})
          .body);
  EXPECT_EQ(eval["score"]["total_weight"], 2.5);
  EXPECT_EQ(eval["score"]["mean_edge_weight"], 1.25);

  auto unknown = run({{"scene", "classroom"}, {"query", "pagerank"}});
  EXPECT_EQ(unknown.status, 400);
  EXPECT_EQ(json::parse(unknown.body)["error"], "UnknownQuery");
  EXPECT_EQ(run({{"scene", "classroom"}, {"query", "core_vertices"}, {"params", {{"threshold", 2}}}}).status, 400);
  EXPECT_EQ(run({{"scene", "classroom"}, {"query", "traverse"}, {"params", {{"start", "zz"}}}}).status, 404);
}

TEST_F(ServiceTest, HistoryEndpoint) {
  auto t = token_for("a6");
  act(t, marry("a3"));
  act(t, {{"verb", "cancel"}, {"relation", "MarryAction"}, {"object", "a3"}, {"scene", "interstellar-war"}});
  HistoryFilter f{"a6", "a3", "MarryAction"};
  auto j = json::parse(service.handle_history(f).body);
  ASSERT_EQ(j["events"].size(), 5u);
  EXPECT_EQ(j["events"].back()["kind"], "BanRecorded");
  auto again = act(t, marry("a3"));
  EXPECT_EQ(again["reason_code"], "IRREVERSIBLE_BAN");
}

TEST_F(ServiceTest, OntologyEndpoint) {
  auto r = service.handle_ontology();
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(Ontology::from_json(json::parse(r.body)), engine.ontology());
}

TEST_F(ServiceTest, HttpRoundTrip) {
  httplib::Server server;
  bind_routes(server, service);
  int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto login = client.Post("/login", R"({"entity": "a6"})", "application/json");
  ASSERT_TRUE(login);
  EXPECT_EQ(login->status, 200);
  EXPECT_EQ(login->get_header_value("Access-Control-Allow-Origin"), "*");
  auto token = json::parse(login->body)["token"].get<std::string>();

  auto body = marry("a3");
  body["token"] = token;
  auto action = client.Post("/actions", body.dump(), "application/json");
  ASSERT_TRUE(action);
  EXPECT_EQ(json::parse(action->body)["outcome"], "Accepted");

  auto scene = client.Get("/scenes/interstellar-war");
  ASSERT_TRUE(scene);
  EXPECT_EQ(scene->body, service.handle_get_scene("interstellar-war").body);
  auto missing = client.Get("/scenes/nowhere");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);

  auto history = client.Get("/history?subject=a3&object=a6&relation=MarryAction");
  ASSERT_TRUE(history);
  EXPECT_EQ(json::parse(history->body)["events"].size(), 2u);

  auto merged = client.Post("/merge", R"({"scenes": ["interstellar-war", "classroom"]})", "application/json");
  ASSERT_TRUE(merged);
  EXPECT_EQ(merged->status, 200);
  auto analytics = client.Post(
      "/analytics", R"({"scene": "interstellar-war", "query": "core_vertices", "params": {"threshold": 0.5}})",
      "application/json");
  ASSERT_TRUE(analytics);
  EXPECT_EQ(analytics->status, 200);
  EXPECT_TRUE(client.Get("/ontology"));
  auto scenes = client.Get("/scenes");
  ASSERT_TRUE(scenes);
  EXPECT_EQ(json::parse(scenes->body)["scenes"].size(), 3u);
  auto preflight = client.Options("/actions");
  ASSERT_TRUE(preflight);
  EXPECT_EQ(preflight->status, 204);

  server.stop();
  worker.join();
}

TEST(ServiceConcurrency, ParallelSubmissionsKeepTheLogConsistent) {
  fixtures::TempDir dir;
  {
    Engine engine(fixtures::ontology(), dir.path());
    engine.run_script(fixtures::golden_script());
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&engine, t] {
        for (int i = 0; i < 50; ++i) {
          auto verb = (i + t) % 2 == 0 ? "establish" : "cancel";
          engine.submit(action_from_json({{"actor", "a5"},
                                          {"verb", verb},
                                          {"relation", "FollowAction"},
                                          {"object", "a3"},
                                          {"scene", "classroom"}}));
        }
      });
    }
    for (auto& th : threads) th.join();
    auto replayed = replay(engine.history(), fixtures::ontology());
    EXPECT_EQ(export_snapshot(replayed).dump(), export_snapshot(*engine.snapshot()).dump());
  }
  Engine reopened(fixtures::ontology(), dir.path());
  auto log = EventLog::open(dir.path());
  EXPECT_EQ(log.size(), reopened.event_count());
}
