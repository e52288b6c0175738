#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spikelens/forest.hpp"
#include "spikelens/market_data.hpp"
#include "spikelens/spike_detector.hpp"

namespace spikelens {

struct FalsePositiveRow {
  std::int64_t segment_id = -1;
  double probability = 0.0;
  double mean_price = 0.0;
  double max_price = 0.0;
  // Some price in the segment strictly exceeds the moderate threshold.
  bool moderate_correlated = false;
};

struct FalsePositiveAudit {
  std::vector<FalsePositiveRow> rows;
  std::size_t n_moderate_correlated = 0;
  double mean_price = 0.0;  // over all false-positive segments; 0 when none
};

// Runs the forest over `test` and inspects every normal segment it flags as a
// spike. Row segment ids index into `segments`.
FalsePositiveAudit false_positive_audit(const Forest& forest, const Dataset& test,
                                        std::span<const Segment> segments,
                                        const MarketSeries& series, double moderate_value);

// segment_id,probability,mean_price,max_price,moderate_correlated
std::string audit_to_csv(const FalsePositiveAudit& audit);

}  // namespace spikelens
