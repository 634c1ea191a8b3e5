#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace semilabel {

// Plain-text `key = value` settings; `#` starts a comment. Later set() calls
// override earlier values, which is how command-line flags win over the file.
class Config {
 public:
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text);

  void set(const std::string& key, const std::string& value);
  // `key=value`
  void set_assignment(const std::string& assignment);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace semilabel
