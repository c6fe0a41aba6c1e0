#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace wsseg {

/// "key = value" text with '#' comments. Keys read through the typed getters
/// are marked consumed so callers can reject typos via check_all_used().
class KeyValues {
 public:
  static KeyValues parse(std::string_view text, const std::string& source = "<text>");
  static KeyValues load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  long long get_int64(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

  /// Throws ConfigError naming the first key no getter asked for.
  void check_all_used() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  const std::string* find(const std::string& key) const;

  std::string source_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

/// Parses "0.125" or "1/8".
double parse_rational(const std::string& text);

}  // namespace wsseg
