#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vip {

// Flat key/value configuration with dotted keys:
//   # comment
//   fusion.window_len = 24
//   fusion.steps = 1,7
// One binding per line; whitespace around keys and values is trimmed; later
// bindings override earlier ones. Values are typed by the accessor.
class Config {
 public:
  static Config parse_text(const std::string& text);
  static Config parse_file(const std::filesystem::path& file);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // comma-separated integers; an empty value yields an empty list
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace vip
