#include "pottsfit/manifest.hpp"

#include <json.hpp>

#include <ctime>
#include <fstream>
#include <stdexcept>

namespace pottsfit {

std::string iso8601_utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["config"] = manifest.config_path;
  j["seed"] = manifest.seed;
  j["tool_version"] = manifest.tool_version;
  j["out_dir"] = manifest.out_dir;
  j["started_at"] = manifest.started_at;
  j["finished_at"] = manifest.finished_at;
  j["status"] = manifest.status;
  j["outputs"] = manifest.outputs;
  j["notes"] = manifest.notes;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("manifest write failed: " + path);
}

}  // namespace pottsfit
