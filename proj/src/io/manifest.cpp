#include <chrono>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "cssense/io.hpp"

namespace cssense::io {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& m, const std::filesystem::path& dir) {
  Json doc{{"config_hash", m.config_hash},   {"tool_version", m.tool_version},
           {"command", m.command},           {"started_at", m.started_at},
           {"finished_at", m.finished_at},   {"base_seed", m.base_seed},
           {"output_paths", m.output_paths}};
  write_json(doc, dir / "manifest.json");
}

RunManifest read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("cannot read manifest in " + dir.string());
  const Json doc = Json::parse(in);
  RunManifest m;
  m.config_hash = doc.at("config_hash").get<std::string>();
  m.tool_version = doc.at("tool_version").get<std::string>();
  m.command = doc.at("command").get<std::string>();
  m.started_at = doc.at("started_at").get<std::string>();
  m.finished_at = doc.at("finished_at").get<std::string>();
  m.base_seed = doc.at("base_seed").get<Seed>();
  m.output_paths = doc.at("output_paths").get<std::vector<std::string>>();
  return m;
}

}  // namespace cssense::io
