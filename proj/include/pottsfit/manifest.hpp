#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pottsfit {

// Provenance record for one tool invocation. Written (without outputs or
// finish time) before heavy computation starts, then rewritten complete.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string out_dir;
  std::string started_at;
  std::string finished_at;
  std::string status = "running";  // running | ok | failed:<reason>
  std::vector<std::string> outputs;  // paths relative to out_dir
  std::vector<std::string> notes;
};

std::string iso8601_utc_now();
void write_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace pottsfit
