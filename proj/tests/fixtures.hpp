#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "metaonce/metaonce.hpp"

#ifndef METAONCE_DATA_DIR
#error "METAONCE_DATA_DIR must point at the repository data/ directory"
#endif

namespace fixtures {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(METAONCE_DATA_DIR) / name;
}

inline const metaonce::Ontology& ontology() {
  static const metaonce::Ontology o = metaonce::Ontology::load(metaonce::bundled_ontology_json);
  return o;
}

inline nlohmann::json golden_script() { return nlohmann::json::parse(read_file(data_path("golden_scenario.json"))); }

inline metaonce::ActionRequest establish(const std::string& actor, const std::string& subject,
                                         const std::string& relation, const std::string& object,
                                         const std::string& scene) {
  return {actor, metaonce::Verb::Establish, subject, relation, object, scene};
}

inline metaonce::ActionRequest cancel(const std::string& actor, const std::string& subject,
                                      const std::string& relation, const std::string& object,
                                      const std::string& scene) {
  return {actor, metaonce::Verb::Cancel, subject, relation, object, scene};
}

/// Fresh, uniquely named directory under the system temp dir; removed on
/// destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("metaonce-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Golden three-scene world plus Kate joining the war scene and Iron Man the
/// Mars scene, so the rule scenarios can be played.
inline void extend_for_rule_scenarios(metaonce::Engine& engine) {
  auto world = engine.snapshot();
  engine.add_entity(world->entities.at("a3"), "interstellar-war");
  engine.add_entity(world->entities.at("a6"), "mars-immigration");
}

}  // namespace fixtures
