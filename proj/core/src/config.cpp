#include "spikelens/config.hpp"

#include "spikelens/error.hpp"
#include "spikelens/text.hpp"

namespace spikelens {
namespace {

std::string fmt_location(std::string_view origin, int line_no) {
  return std::string(origin) + ":" + std::to_string(line_no) + ": ";
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, std::string_view origin) {
  KeyValueConfig config;
  std::string section;
  int line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        fail(ErrorCode::InvalidConfig,
             fmt_location(origin, line_no) + "unterminated section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::InvalidConfig, fmt_location(origin, line_no) + "expected key = value");
    }
    std::string key(trim(line.substr(0, eq)));
    if (key.empty()) fail(ErrorCode::InvalidConfig, fmt_location(origin, line_no) + "empty key");
    if (!section.empty()) key = section + "." + key;
    config.values_[key] = std::string(trim(line.substr(eq + 1)));
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  auto v = parse_double(it->second);
  if (!v) fail(ErrorCode::InvalidConfig, key + ": expected a number, got '" + it->second + "'");
  return *v;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  auto v = parse_int(it->second);
  if (!v) fail(ErrorCode::InvalidConfig, key + ": expected an integer, got '" + it->second + "'");
  return *v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorCode::InvalidConfig, key + ": expected a boolean, got '" + v + "'");
}

std::string KeyValueConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace spikelens
