#include "spikelens/state_space.hpp"

#include <algorithm>
#include <cmath>

#include "spikelens/error.hpp"

namespace spikelens {

std::string_view to_string(FeatureStat stat) {
  switch (stat) {
    case FeatureStat::Mean: return "mean";
    case FeatureStat::Std: return "std";
    case FeatureStat::AvgGrad: return "avg_grad";
    case FeatureStat::MaxGrad: return "max_grad";
  }
  return "mean";
}

std::string feature_name(std::string_view channel, FeatureStat stat) {
  return std::string(channel) + "__" + std::string(to_string(stat));
}

std::optional<ParsedFeature> parse_feature_name(std::string_view name) {
  const auto pos = name.rfind("__");
  if (pos == std::string_view::npos || pos == 0) return std::nullopt;
  const std::string_view suffix = name.substr(pos + 2);
  for (FeatureStat stat : kAllStats) {
    if (suffix == to_string(stat)) return ParsedFeature{std::string(name.substr(0, pos)), stat};
  }
  return std::nullopt;
}

double WindowStats::get(FeatureStat stat) const {
  switch (stat) {
    case FeatureStat::Mean: return mean;
    case FeatureStat::Std: return std;
    case FeatureStat::AvgGrad: return avg_grad;
    case FeatureStat::MaxGrad: return max_grad;
  }
  return mean;
}

WindowStats window_stats(std::span<const double> window) {
  const std::size_t n = window.size();
  if (n < 2) fail(ErrorCode::SegmentTooShort, "segment needs at least two samples");
  WindowStats s;
  double sum = 0.0;
  for (double v : window) sum += v;
  s.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : window) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(n - 1));
  s.avg_grad = (window[n - 1] - window[0]) / static_cast<double>(n - 1);
  double best = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double d = window[i] - window[i - 1];
    if (std::abs(d) > std::abs(best)) best = d;
  }
  s.max_grad = best;
  return s;
}

std::vector<FeatureColumn> feature_layout(const MarketSeries& series, const ChannelFilter& filter) {
  for (const auto& name : filter.channels) {
    if (!series.channel_index(name)) fail(ErrorCode::UnknownChannel, "unknown channel '" + name + "'");
  }
  std::vector<FeatureColumn> columns;
  for (std::size_t c = 0; c < series.n_channels(); ++c) {
    const auto& meta = series.channel(c);
    if (meta.is_price_signal) continue;
    if (!filter.channels.empty() &&
        std::find(filter.channels.begin(), filter.channels.end(), meta.name) ==
            filter.channels.end()) {
      continue;
    }
    for (FeatureStat stat : kAllStats) {
      if (meta.hourly && stat != FeatureStat::Mean) continue;
      columns.push_back(FeatureColumn{c, stat, feature_name(meta.name, stat)});
    }
  }
  return columns;
}

namespace {

void fill_row(const Segment& segment, const MarketSeries& series,
              std::span<const FeatureColumn> layout, std::vector<double>& out) {
  if (segment.end >= series.length() || segment.start > segment.end) {
    fail(ErrorCode::Internal, "segment outside the series");
  }
  out.clear();
  std::size_t cached_channel = series.n_channels();
  WindowStats stats;
  for (const auto& col : layout) {
    if (col.channel != cached_channel) {
      const auto column = series.column(col.channel);
      if (series.any_missing(col.channel)) {
        fail(ErrorCode::MissingValue, "channel '" + series.channel(col.channel).name +
                                          "' still has missing values");
      }
      stats = window_stats(column.subspan(segment.start, segment.length()));
      cached_channel = col.channel;
    }
    out.push_back(stats.get(col.stat));
  }
}

}  // namespace

StateVector summarize(const Segment& segment, std::size_t segment_index,
                      const MarketSeries& series, const ChannelFilter& filter) {
  const auto layout = feature_layout(series, filter);
  StateVector sv;
  sv.segment_index = segment_index;
  sv.label = segment.anomalous() ? 1 : 0;
  for (const auto& col : layout) sv.names.push_back(col.name);
  fill_row(segment, series, layout, sv.values);
  return sv;
}

Dataset::Dataset(std::vector<std::string> feature_names) : names_(std::move(feature_names)) {}

void Dataset::add_row(std::span<const double> features, int label, std::int64_t segment_id) {
  if (features.size() != names_.size()) {
    fail(ErrorCode::DimensionMismatch, "row has " + std::to_string(features.size()) +
                                           " features, dataset has " +
                                           std::to_string(names_.size()));
  }
  values_.insert(values_.end(), features.begin(), features.end());
  labels_.push_back(label != 0 ? 1 : 0);
  segment_ids_.push_back(segment_id);
}

std::size_t Dataset::n_positive() const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out(names_);
  for (std::size_t r : rows) out.add_row(row(r), labels_.at(r), segment_ids_.at(r));
  return out;
}

std::string Dataset::to_csv() const {
  std::string out = "segment_id";
  for (const auto& n : names_) out += "," + n;
  out += ",label\n";
  for (std::size_t r = 0; r < n_rows(); ++r) {
    out += std::to_string(segment_ids_[r]);
    for (double v : row(r)) out += "," + format_double(v);
    out += "," + std::to_string(labels_[r]) + "\n";
  }
  return out;
}

Dataset Dataset::from_csv(std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) fail(ErrorCode::EmptyFile, "dataset CSV has no header");
  const auto header = split(trim(lines[0]), ',');
  if (header.size() < 2 || header.front() != "segment_id" || header.back() != "label") {
    fail(ErrorCode::MissingColumn, "dataset header must be segment_id,<features>,label");
  }
  std::vector<std::string> names;
  for (std::size_t i = 1; i + 1 < header.size(); ++i) names.emplace_back(header[i]);
  Dataset ds(std::move(names));
  std::vector<double> row;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split(trim(lines[li]), ',');
    if (cells.size() != header.size()) {
      fail(ErrorCode::BadNumber, "dataset line " + std::to_string(li + 1) + ": wrong cell count");
    }
    auto id = parse_int(cells.front());
    auto label = parse_int(cells.back());
    if (!id || !label) fail(ErrorCode::BadNumber, "dataset line " + std::to_string(li + 1));
    row.clear();
    for (std::size_t i = 1; i + 1 < cells.size(); ++i) {
      auto v = parse_double(cells[i]);
      if (!v) fail(ErrorCode::BadNumber, "dataset line " + std::to_string(li + 1));
      row.push_back(*v);
    }
    ds.add_row(row, static_cast<int>(*label), *id);
  }
  return ds;
}

Dataset build_dataset(std::span<const Segment> segments, const MarketSeries& series,
                      const ChannelFilter& filter) {
  const auto layout = feature_layout(series, filter);
  std::vector<std::string> names;
  for (const auto& col : layout) names.push_back(col.name);
  Dataset ds(std::move(names));
  std::vector<double> row;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    fill_row(segments[i], series, layout, row);
    ds.add_row(row, segments[i].anomalous() ? 1 : 0, static_cast<std::int64_t>(i));
  }
  const std::size_t pos = ds.n_positive();
  if (pos == 0 || pos == ds.n_rows()) {
    fail(ErrorCode::SingleClassDataset, "dataset needs both spike and normal segments (" +
                                            std::to_string(pos) + " of " +
                                            std::to_string(ds.n_rows()) + " are spikes)");
  }
  return ds;
}

}  // namespace spikelens
