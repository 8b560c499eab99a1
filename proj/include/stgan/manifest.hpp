#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace stgan {

inline constexpr const char* kToolVersion = "0.1.0";

// Provenance record written by every CLI command. The config snapshot is
// canonicalized (sorted keys) before hashing, so the hash is stable under
// key reordering.
struct RunManifest {
  std::string command;
  nlohmann::json config;  // full effective configuration
  std::uint64_t seed = 0;
  std::vector<std::string> artifacts;  // paths relative to the run directory
  int threads = 1;
  double wall_seconds = 0.0;
  std::string tool_version = kToolVersion;

  std::string config_hash() const;
  nlohmann::json to_json() const;

  // Writes <dir>/manifest.json atomically (temp file + rename).
  void write(const std::string& dir) const;
  static RunManifest read(const std::string& path);
};

}  // namespace stgan
