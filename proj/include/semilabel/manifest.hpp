#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace semilabel {

inline constexpr const char* kToolVersion = "0.3.0";

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_file(const std::filesystem::path& path);

// Everything needed to rerun a command and get byte-identical outputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> models;  // path or endpoint -> hash/identity
  std::vector<std::pair<std::string, std::string>> inputs;  // path -> sha256
  std::vector<std::pair<std::string, std::string>> outputs;
  std::map<std::string, std::string> notes;  // rules applied that are not settings
  std::string timestamp;                     // UTC, ISO 8601
  std::string tool_version = kToolVersion;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  void add_model(const std::filesystem::path& path);
  std::string to_json() const;
  void write(const std::filesystem::path& path) const;
};

std::string utc_timestamp();

}  // namespace semilabel
