#include "pottsfit/config.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

namespace pottsfit {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace((unsigned char)s[a])) ++a;
  while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
  throw std::invalid_argument(origin + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  for (const auto& e : entries)
    if (e.section == section && e.key == key) return true;
  return false;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
  const ConfigEntry* found = nullptr;
  for (const auto& e : entries)
    if (e.section == section && e.key == key) found = &e;
  if (!found)
    throw std::invalid_argument("missing config key [" + section + "] " + key);
  return found->value;
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

std::vector<std::string> ConfigFile::all(const std::string& section,
                                         const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (e.section == section && e.key == key) out.push_back(e.value);
  return out;
}

ConfigFile parse_config(std::istream& in, const std::string& origin) {
  ConfigFile cfg;
  std::string line, section;
  bool in_section = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail(origin, lineno, "unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) fail(origin, lineno, "empty section name");
      in_section = true;
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
    if (!in_section) fail(origin, lineno, "key outside any [section]");
    std::string key = trim(t.substr(0, eq));
    if (key.empty()) fail(origin, lineno, "empty key");
    cfg.entries.push_back({section, key, trim(t.substr(eq + 1)), lineno});
  }
  return cfg;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config: " + path);
  return parse_config(in, path);
}

}  // namespace pottsfit
