#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace spikelens {

/// Flat `key = value` configuration. Lines starting with '#' or ';' are
/// comments; a `[section]` header prefixes the following keys with
/// `section.` so `[threshold]\nmode = fixed` and `threshold.mode = fixed`
/// are equivalent. Later assignments override earlier ones.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text, std::string_view origin = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

  // Sorted `key = value` lines; stable across runs.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace spikelens
