#include "stgan/manifest.hpp"

#include <cstdio>
#include <filesystem>

#include "stgan/common.hpp"

namespace stgan {

std::string RunManifest::config_hash() const {
  std::uint64_t h = fnv1a64(config.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config;
  j["config_hash"] = config_hash();
  j["seed"] = seed;
  j["artifacts"] = artifacts;
  j["threads"] = threads;
  j["wall_seconds"] = wall_seconds;
  j["tool_version"] = tool_version;
  return j;
}

void RunManifest::write(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path final_path = fs::path(dir) / "manifest.json";
  const fs::path tmp_path = fs::path(dir) / "manifest.json.tmp";
  write_text_file(tmp_path.string(), to_json().dump(2) + "\n");
  fs::rename(tmp_path, final_path);
}

RunManifest RunManifest::read(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config = j.at("config");
  m.seed = j.at("seed").get<std::uint64_t>();
  m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
  m.threads = j.at("threads").get<int>();
  m.wall_seconds = j.at("wall_seconds").get<double>();
  m.tool_version = j.at("tool_version").get<std::string>();
  return m;
}

}  // namespace stgan
