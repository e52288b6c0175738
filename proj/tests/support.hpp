#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spikelens/market_data.hpp"
#include "spikelens/rng.hpp"
#include "spikelens/state_space.hpp"

namespace testing {

// One price channel `mce` plus the given feature channels, all 5-minute.
spikelens::MarketSeries make_series(const std::vector<double>& price,
                                    const std::vector<std::vector<double>>& features = {},
                                    spikelens::UnixSeconds start = 1625097600);  // 2021-07-01

// Random dataset: n rows, d features drawn U(0,1), labels from a noisy
// linear rule with roughly `positive_rate` positives (at least one of each).
spikelens::Dataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed,
                                  double positive_rate = 0.3);

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

}  // namespace testing
