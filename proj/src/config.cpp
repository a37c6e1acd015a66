#include "vip/config.hpp"

#include <fstream>
#include <sstream>

#include "vip/error.hpp"

namespace vip {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::InvalidArgument,
           "config line " + std::to_string(lineno) + " is not 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty())
      fail(ErrorCode::InvalidArgument, "config line " + std::to_string(lineno) + " has no key");
    cfg.values_[key] = trim(t.substr(eq + 1));
  }
  return cfg;
}

Config Config::parse_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorCode::IoError, "cannot open config " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string Config::require_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorCode::InvalidArgument, "missing config key: " + key);
  return it->second;
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "config key " + key + " is not an integer");
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "config key " + key + " is not a number");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorCode::InvalidArgument, "config key " + key + " is not a boolean");
}

std::vector<int> Config::get_int_list(const std::string& key,
                                      const std::vector<int>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<int> out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    try {
      out.push_back(std::stoi(t));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "config key " + key + " is not an integer list");
    }
  }
  return out;
}

}  // namespace vip
