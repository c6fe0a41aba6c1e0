#include "wsseg/common/keyvalue.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "wsseg/common/error.hpp"

namespace wsseg {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename N>
N parse_number(const std::string& key, const std::string& text) {
  N v{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid value '" + text + "' for key '" + key + "'");
  }
  return v;
}

}  // namespace

double parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_number<double>("ratio", trim(text));
  const double num = parse_number<double>("ratio", trim(text.substr(0, slash)));
  const double den = parse_number<double>("ratio", trim(text.substr(slash + 1)));
  if (den == 0.0) throw ConfigError("zero denominator in '" + text + "'");
  return num / den;
}

KeyValues KeyValues::parse(std::string_view text, const std::string& source) {
  KeyValues kv;
  kv.source_ = source;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    if (kv.values_.count(key)) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    kv.values_[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path.string());
}

const std::string* KeyValues::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
  const auto* v = find(key);
  return v ? *v : fallback;
}

int KeyValues::get_int(const std::string& key, int fallback) const {
  const auto* v = find(key);
  return v ? parse_number<int>(key, *v) : fallback;
}

long long KeyValues::get_int64(const std::string& key, long long fallback) const {
  const auto* v = find(key);
  return v ? parse_number<long long>(key, *v) : fallback;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  try {
    return parse_rational(*v);
  } catch (const ConfigError&) {
    throw ConfigError("invalid value '" + *v + "' for key '" + key + "'");
  }
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("invalid boolean '" + *v + "' for key '" + key + "'");
}

std::vector<int> KeyValues::get_int_list(const std::string& key,
                                         const std::vector<int>& fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  std::vector<int> out;
  std::string item;
  std::istringstream in(*v);
  while (std::getline(in, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
  return out;
}

void KeyValues::check_all_used() const {
  for (const auto& [key, value] : values_) {
    if (!used_.count(key)) throw ConfigError(source_ + ": unknown key '" + key + "'");
  }
}

}  // namespace wsseg
