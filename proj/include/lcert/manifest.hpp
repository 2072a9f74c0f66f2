#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lcert {

struct ArtifactEntry {
  std::string kind;
  std::string path;  // relative to the manifest's directory
  std::string hash;  // hex content digest
};

/// Per-run record tying every emitted artifact to its content hash and the
/// configs that produced it. run_id is derived from (master seed, config
/// digest), never from wall-clock time, so reruns are byte-identical.
struct RunManifest {
  std::string run_id;
  std::string config_digest;
  std::vector<ArtifactEntry> artifacts;
  std::string tool_version;
  std::uint64_t master_seed = 0;

  static RunManifest create(std::uint64_t master_seed, const std::string& config_text);
  /// Hashes the file at dir/rel_path and records it.
  void add_artifact(const std::string& kind, const std::string& dir,
                    const std::string& rel_path);
  void save(const std::string& path) const;
  static RunManifest load(const std::string& path);
};

std::uint64_t hash_file(const std::string& path);

}  // namespace lcert
