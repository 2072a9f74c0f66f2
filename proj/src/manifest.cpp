#include "lcert/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lcert/common.hpp"
#include "lcert/hash.hpp"

namespace lcert {

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '%s' for hashing", path.c_str());
  Fnv1a h;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  return h.digest();
}

RunManifest RunManifest::create(std::uint64_t master_seed, const std::string& config_text) {
  RunManifest m;
  m.master_seed = master_seed;
  m.config_digest = hex_digest(fnv1a64(config_text));
  m.run_id = hex_digest(mix64(master_seed ^ fnv1a64(config_text)));
  m.tool_version = kVersion;
  return m;
}

void RunManifest::add_artifact(const std::string& kind, const std::string& dir,
                               const std::string& rel_path) {
  artifacts.push_back({kind, rel_path, hex_digest(hash_file(dir + "/" + rel_path))});
}

void RunManifest::save(const std::string& path) const {
  nlohmann::json j;
  j["run_id"] = run_id;
  j["config_digest"] = config_digest;
  j["tool_version"] = tool_version;
  j["master_seed"] = master_seed;
  nlohmann::json arts = nlohmann::json::array();
  for (const auto& a : artifacts)
    arts.push_back({{"kind", a.kind}, {"path", a.path}, {"hash", a.hash}});
  j["artifacts"] = arts;
  std::ofstream out(path);
  if (!out) fail("cannot open '%s' for writing", path.c_str());
  out << j.dump(2) << "\n";
  if (!out) fail("write to '%s' failed", path.c_str());
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open manifest '%s'", path.c_str());
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j = nlohmann::json::parse(ss.str());
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.config_digest = j.at("config_digest").get<std::string>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  for (const auto& a : j.at("artifacts"))
    m.artifacts.push_back({a.at("kind").get<std::string>(), a.at("path").get<std::string>(),
                           a.at("hash").get<std::string>()});
  return m;
}

}  // namespace lcert
