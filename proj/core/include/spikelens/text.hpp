#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spikelens {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);
// Fixed-point with the given number of decimals ("-0.000" is normalized to "0.000").
std::string format_fixed(double value, int decimals);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);

std::string read_file(const std::filesystem::path& path);
// Writes atomically enough for our purposes: create parent dirs, then write.
void write_file(const std::filesystem::path& path, std::string_view contents);

// Seconds since the Unix epoch, UTC.
using UnixSeconds = std::int64_t;

// Accepts "YYYY-MM-DDTHH:MM[:SS]" with 'T' or ' ' separator and an optional
// trailing 'Z' or "+00:00".
std::optional<UnixSeconds> parse_timestamp(std::string_view text);
// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(UnixSeconds t);

struct CivilTime {
  int year;
  unsigned month;  // 1..12
  unsigned day;    // 1..31
  int hour;
  int minute;
  int second;
};

CivilTime to_civil(UnixSeconds t);
UnixSeconds from_civil(const CivilTime& c);

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace spikelens
