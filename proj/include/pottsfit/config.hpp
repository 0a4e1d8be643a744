#pragma once

#include <istream>
#include <string>
#include <vector>

namespace pottsfit {

// One `key = value` line from a config file, tagged with its [section].
// Entries keep file order and repeated keys are preserved; interpretation
// (including unknown-key rejection) is up to the consumer.
struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

struct ConfigFile {
  std::vector<ConfigEntry> entries;

  bool has(const std::string& section, const std::string& key) const;
  // last value wins for scalar lookups; throws std::invalid_argument if absent
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  std::vector<std::string> all(const std::string& section, const std::string& key) const;
};

// Line-oriented format: blank lines and lines starting with # are ignored,
// `[name]` opens a section, and every other line must be `key = value`.
// Keys before the first section header are an error.
ConfigFile parse_config(std::istream& in, const std::string& origin);
ConfigFile load_config(const std::string& path);

}  // namespace pottsfit
