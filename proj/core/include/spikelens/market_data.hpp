#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spikelens/text.hpp"

namespace spikelens {

enum class DriverCategory {
  Congestion,
  DayAhead,
  ForecastError,
  Generation,
  RegulationPrices,
  Others,
};

inline constexpr std::array<DriverCategory, 6> kAllCategories = {
    DriverCategory::Congestion, DriverCategory::DayAhead,         DriverCategory::ForecastError,
    DriverCategory::Generation, DriverCategory::RegulationPrices, DriverCategory::Others,
};

std::string_view to_string(DriverCategory category);
// Accepts the canonical names plus a few spelled-out aliases ("Day-Ahead",
// "Forecasting Error", "Regulation Prices"), case-insensitive.
std::optional<DriverCategory> parse_category(std::string_view text);

struct ChannelMeta {
  std::string name;
  std::string unit;
  DriverCategory category = DriverCategory::Others;
  bool is_price_signal = false;
  // Hourly channels carry one value per hour in the CSV and are step-expanded
  // onto the 5-minute grid at ingestion.
  bool hourly = false;

  bool operator==(const ChannelMeta&) const = default;
};

/// Column-to-metadata mapping read from a schema file. One channel per line:
///
///     # column = category | unit | role [| hourly]
///     mce      = Others     | $/MWh | price
///     mcc_sce  = Congestion | $/MWh | feature
///     da_lmp   = DayAhead   | $/MWh | feature | hourly
///
/// Channel order in the resulting series follows the schema file.
struct ChannelSchema {
  std::vector<ChannelMeta> channels;

  static ChannelSchema parse(std::string_view text);
  static ChannelSchema load(const std::filesystem::path& path);
  std::string to_text() const;
};

/// Multi-channel series on a fixed 5-minute UTC grid. Values are stored
/// column-major so each channel is a contiguous span.
class MarketSeries {
 public:
  static constexpr UnixSeconds kInterval = 300;

  MarketSeries() = default;
  // All cells start missing.
  MarketSeries(UnixSeconds start, std::vector<ChannelMeta> channels, std::size_t length);

  UnixSeconds start() const { return start_; }
  std::size_t length() const { return length_; }
  std::size_t n_channels() const { return channels_.size(); }
  const std::vector<ChannelMeta>& channels() const { return channels_; }
  const ChannelMeta& channel(std::size_t c) const { return channels_.at(c); }
  std::optional<std::size_t> channel_index(std::string_view name) const;
  std::size_t price_index() const;

  UnixSeconds timestamp(std::size_t row) const {
    return start_ + static_cast<UnixSeconds>(row) * kInterval;
  }

  double value(std::size_t row, std::size_t col) const { return values_[col * length_ + row]; }
  bool missing(std::size_t row, std::size_t col) const { return missing_[col * length_ + row] != 0; }
  void set(std::size_t row, std::size_t col, double v);
  void set_missing(std::size_t row, std::size_t col);

  std::span<const double> column(std::size_t col) const {
    return {values_.data() + col * length_, length_};
  }
  std::span<const double> price() const { return column(price_index()); }
  bool any_missing(std::size_t col) const;

  // Bit-exact comparison: metadata and grid must match, then the missing
  // mask, then every present value.
  bool operator==(const MarketSeries& other) const;

 private:
  UnixSeconds start_ = 0;
  std::size_t length_ = 0;
  std::vector<ChannelMeta> channels_;
  std::vector<double> values_;
  std::vector<unsigned char> missing_;
};

enum class GridPolicy {
  InsertMissing,  // absent 5-minute rows become all-missing rows
  Reject,         // any absent row is NonUniformGrid
};

enum class FillPolicy { ForwardFill, Linear, Fail };

std::optional<GridPolicy> parse_grid_policy(std::string_view text);
std::optional<FillPolicy> parse_fill_policy(std::string_view text);

MarketSeries parse_csv(std::string_view text, const ChannelSchema& schema,
                       GridPolicy grid = GridPolicy::InsertMissing);
MarketSeries load_csv(const std::filesystem::path& path, const ChannelSchema& schema,
                      GridPolicy grid = GridPolicy::InsertMissing);

// Header `timestamp,<channel...>`; missing cells are empty; values use the
// shortest round-trip decimal form so reloading is bit-exact.
std::string to_csv(const MarketSeries& series);

// Fills non-price channels. The price channel is never filled: any missing
// price value raises MissingPriceValue whatever the policy.
MarketSeries fill_gaps(const MarketSeries& series, FillPolicy policy);

// load_csv followed by fill_gaps.
MarketSeries ingest(const std::filesystem::path& csv, const ChannelSchema& schema,
                    GridPolicy grid, FillPolicy fill);

}  // namespace spikelens
