#include "support.hpp"

#include <algorithm>

namespace testing {

using namespace spikelens;

MarketSeries make_series(const std::vector<double>& price,
                         const std::vector<std::vector<double>>& features, UnixSeconds start) {
  std::vector<ChannelMeta> channels;
  channels.push_back({"mce", "$/MWh", DriverCategory::Others, true, false});
  const DriverCategory cats[] = {DriverCategory::Congestion, DriverCategory::DayAhead,
                                 DriverCategory::ForecastError, DriverCategory::Generation,
                                 DriverCategory::RegulationPrices, DriverCategory::Others};
  for (std::size_t i = 0; i < features.size(); ++i) {
    channels.push_back({"ch" + std::to_string(i), "u", cats[i % 6], false, false});
  }
  MarketSeries s(start, channels, price.size());
  for (std::size_t r = 0; r < price.size(); ++r) {
    s.set(r, 0, price[r]);
    for (std::size_t c = 0; c < features.size(); ++c) s.set(r, c + 1, features[c][r]);
  }
  return s;
}

Dataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed, double positive_rate) {
  Rng rng(seed);
  std::vector<std::string> names;
  for (std::size_t f = 0; f < d; ++f) names.push_back("f" + std::to_string(f));
  Dataset data(names);
  std::vector<double> row(d);
  std::vector<std::vector<double>> rows;
  std::vector<double> scores;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : row) v = rng.uniform();
    double s = 0.0;
    for (std::size_t f = 0; f < std::min<std::size_t>(d, 3); ++f) s += row[f];
    scores.push_back(s + 0.3 * rng.uniform());
    rows.push_back(row);
  }
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  const auto cut_index = std::clamp<std::size_t>(
      static_cast<std::size_t>(static_cast<double>(n) * (1.0 - positive_rate)), 1, n - 1);
  const double cut = sorted[cut_index];
  for (std::size_t i = 0; i < n; ++i) {
    data.add_row(rows[i], scores[i] >= cut ? 1 : 0, static_cast<std::int64_t>(i));
  }
  return data;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("spikelens_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
