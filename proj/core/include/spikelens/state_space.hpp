#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spikelens/market_data.hpp"
#include "spikelens/spike_detector.hpp"

namespace spikelens {

enum class FeatureStat { Mean, Std, AvgGrad, MaxGrad };

inline constexpr std::array<FeatureStat, 4> kAllStats = {FeatureStat::Mean, FeatureStat::Std,
                                                         FeatureStat::AvgGrad, FeatureStat::MaxGrad};

std::string_view to_string(FeatureStat stat);

// Feature names are `<channel>__<stat>`.
std::string feature_name(std::string_view channel, FeatureStat stat);

struct ParsedFeature {
  std::string channel;
  FeatureStat stat;
};
std::optional<ParsedFeature> parse_feature_name(std::string_view name);

struct WindowStats {
  double mean = 0.0;
  double std = 0.0;       // sample (n - 1)
  double avg_grad = 0.0;  // (last - first) / (n - 1)
  double max_grad = 0.0;  // signed first difference of largest magnitude, earliest on ties

  double get(FeatureStat stat) const;
};

// Requires at least two samples (SegmentTooShort otherwise).
WindowStats window_stats(std::span<const double> window);

// Channels that feed the state vector. Empty `channels` selects every
// non-price channel; otherwise the named channels, in series order. The price
// channel is never a feature.
struct ChannelFilter {
  std::vector<std::string> channels;
};

struct FeatureColumn {
  std::size_t channel = 0;
  FeatureStat stat = FeatureStat::Mean;
  std::string name;
};

// Hourly channels contribute only their mean; all others contribute the four
// statistics.
std::vector<FeatureColumn> feature_layout(const MarketSeries& series, const ChannelFilter& filter);

struct StateVector {
  std::size_t segment_index = 0;
  std::vector<std::string> names;
  std::vector<double> values;
  int label = 0;  // 1 = spike segment
};

StateVector summarize(const Segment& segment, std::size_t segment_index,
                      const MarketSeries& series, const ChannelFilter& filter = {});

/// Row-major feature matrix with binary labels and, per row, the id of the
/// segment it summarises.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<std::string> feature_names);

  void add_row(std::span<const double> features, int label, std::int64_t segment_id = -1);

  std::size_t n_rows() const { return labels_.size(); }
  std::size_t n_features() const { return names_.size(); }
  const std::vector<std::string>& feature_names() const { return names_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * names_.size(), names_.size()};
  }
  double at(std::size_t row, std::size_t col) const { return values_[row * names_.size() + col]; }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  std::int64_t segment_id(std::size_t i) const { return segment_ids_[i]; }
  std::size_t n_positive() const;

  Dataset subset(std::span<const std::size_t> rows) const;

  // segment_id,<feature...>,label
  std::string to_csv() const;
  static Dataset from_csv(std::string_view text);

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
  std::vector<int> labels_;
  std::vector<std::int64_t> segment_ids_;
};

// One row per segment in the given (chronological) order; segment_id is the
// position in `segments`. Throws SingleClassDataset unless both labels occur.
Dataset build_dataset(std::span<const Segment> segments, const MarketSeries& series,
                      const ChannelFilter& filter = {});

}  // namespace spikelens
