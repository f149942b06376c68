// metaonce-server: loads the ontology, replays the event log in the data
// directory, optionally applies a seed script to an empty world, and serves
// the JSON API.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "metaonce/http.hpp"
#include "metaonce/metaonce.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw metaonce::Error(metaonce::ErrorKind::StorageError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  metaonce::ServiceConfig config;
  std::string dump_scene;
  bool dump_world = false;

  CLI::App app{"Rule-constrained multi-scene knowledge graph server"};
  app.add_option("--host", config.host, "Listen address")->capture_default_str();
  app.add_option("--port", config.port, "Listen port")->capture_default_str();
  app.add_option("--data-dir", config.data_dir, "Directory holding events.log")->capture_default_str();
  app.add_option("--ontology", config.ontology_path, "Ontology JSON document (default: bundled)");
  app.add_option("--seed", config.seed_path, "Seed script applied when the event log is empty");
  app.add_option("--max-hops", config.max_hops, "Default hop bound for all_simple_paths")->capture_default_str();
  app.add_option("--core-threshold", config.core_threshold, "Default clustering threshold for core_vertices")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--dump-scene", dump_scene, "Print one scene snapshot after startup and exit");
  app.add_flag("--dump-world", dump_world, "Print the full world snapshot after startup and exit");
  CLI11_PARSE(app, argc, argv);

  try {
    auto ontology = config.ontology_path.empty() ? metaonce::Ontology::load(metaonce::bundled_ontology_json)
                                                 : metaonce::Ontology::load(read_file(config.ontology_path));
    metaonce::Engine engine(std::move(ontology), config.data_dir);

    if (!config.seed_path.empty()) {
      if (engine.event_count() == 0) {
        auto decisions = engine.run_script(nlohmann::json::parse(read_file(config.seed_path)));
        for (const auto& d : decisions) {
          if (!d.accepted()) std::cerr << "seed action rejected: " << to_string(d.reason_code) << " " << d.message << "\n";
        }
      } else {
        std::cerr << "event log is not empty; ignoring --seed\n";
      }
    }

    if (dump_world) {
      std::cout << metaonce::export_snapshot(*engine.snapshot()).dump() << "\n";
      return 0;
    }
    if (!dump_scene.empty()) {
      std::cout << metaonce::export_scene(*engine.snapshot(), dump_scene).dump() << "\n";
      return 0;
    }

    metaonce::Service service(engine, config);
    httplib::Server server;
    metaonce::bind_routes(server, service);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "listening on " << config.host << ":" << config.port << " (" << engine.event_count()
              << " events replayed)\n";
    if (!server.listen(config.host, config.port)) {
      std::cerr << "cannot listen on " << config.host << ":" << config.port << "\n";
      return 1;
    }
  } catch (const metaonce::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "seed script: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
