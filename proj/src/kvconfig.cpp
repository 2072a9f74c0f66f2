#include "lcert/kvconfig.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lcert/common.hpp"

namespace lcert {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

KvConfig KvConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file '%s'", path.c_str());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

KvConfig KvConfig::parse_text(const std::string& text, const std::string& origin) {
  KvConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      fail("%s:%d: expected 'key = value', got '%s'", origin.c_str(), lineno, stripped.c_str());
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) fail("%s:%d: empty key", origin.c_str(), lineno);
    if (cfg.has(key)) fail("%s:%d: duplicate key '%s'", origin.c_str(), lineno, key.c_str());
    cfg.entries_.emplace_back(key, value);
  }
  return cfg;
}

std::optional<std::string> KvConfig::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

bool KvConfig::has(const std::string& key) const { return find(key).has_value(); }

std::string KvConfig::get_str(const std::string& key) const {
  auto v = find(key);
  if (!v) fail("%s: missing required key '%s'", origin_.c_str(), key.c_str());
  return *v;
}

std::string KvConfig::get_str(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

std::int64_t KvConfig::get_int(const std::string& key) const {
  std::string v = get_str(key);
  errno = 0;
  char* end = nullptr;
  long long r = std::strtoll(v.c_str(), &end, 10);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    fail("%s: key '%s' is not an integer: '%s'", origin_.c_str(), key.c_str(), v.c_str());
  return r;
}

std::int64_t KvConfig::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t KvConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  std::string v = get_str(key);
  errno = 0;
  char* end = nullptr;
  unsigned long long r = std::strtoull(v.c_str(), &end, 10);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    fail("%s: key '%s' is not an unsigned integer: '%s'", origin_.c_str(), key.c_str(),
         v.c_str());
  return r;
}

double KvConfig::get_f64(const std::string& key) const {
  std::string v = get_str(key);
  errno = 0;
  char* end = nullptr;
  double r = std::strtod(v.c_str(), &end);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    fail("%s: key '%s' is not a number: '%s'", origin_.c_str(), key.c_str(), v.c_str());
  return r;
}

double KvConfig::get_f64(const std::string& key, double fallback) const {
  return has(key) ? get_f64(key) : fallback;
}

std::vector<int> KvConfig::get_int_list(const std::string& key) const {
  std::string v = get_str(key);
  std::vector<int> out;
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail("%s: key '%s' has an empty list entry", origin_.c_str(), key.c_str());
    errno = 0;
    char* end = nullptr;
    long r = std::strtol(item.c_str(), &end, 10);
    if (errno != 0 || end == item.c_str() || *end != '\0')
      fail("%s: key '%s' has non-integer entry '%s'", origin_.c_str(), key.c_str(),
           item.c_str());
    out.push_back(static_cast<int>(r));
  }
  if (out.empty()) fail("%s: key '%s' is an empty list", origin_.c_str(), key.c_str());
  return out;
}

void KvConfig::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = value;
      return;
    }
  entries_.emplace_back(key, value);
}

void KvConfig::set_int(const std::string& key, std::int64_t v) { set(key, strfmt("%lld", static_cast<long long>(v))); }
void KvConfig::set_u64(const std::string& key, std::uint64_t v) { set(key, strfmt("%llu", static_cast<unsigned long long>(v))); }
void KvConfig::set_f64(const std::string& key, double v) { set(key, strfmt("%.17g", v)); }

std::string KvConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

void KvConfig::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail("cannot open '%s' for writing", path.c_str());
  out << to_text();
  if (!out) fail("write to '%s' failed", path.c_str());
}

}  // namespace lcert
