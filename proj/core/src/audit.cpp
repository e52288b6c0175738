#include "spikelens/audit.hpp"

#include <algorithm>

#include "spikelens/error.hpp"
#include "spikelens/text.hpp"

namespace spikelens {

FalsePositiveAudit false_positive_audit(const Forest& forest, const Dataset& test,
                                        std::span<const Segment> segments,
                                        const MarketSeries& series, double moderate_value) {
  FalsePositiveAudit audit;
  const auto prices = series.price();
  double price_sum = 0.0;
  for (std::size_t i = 0; i < test.n_rows(); ++i) {
    if (test.label(i) != 0) continue;
    const double p = forest.predict_proba(test.row(i));
    if (p < forest.params().decision_threshold) continue;
    const std::int64_t id = test.segment_id(i);
    if (id < 0 || static_cast<std::size_t>(id) >= segments.size()) {
      fail(ErrorCode::Internal, "test row refers to unknown segment " + std::to_string(id));
    }
    const Segment& seg = segments[static_cast<std::size_t>(id)];
    const auto window = prices.subspan(seg.start, seg.length());
    double sum = 0.0;
    for (double v : window) sum += v;
    FalsePositiveRow row;
    row.segment_id = id;
    row.probability = p;
    row.mean_price = sum / static_cast<double>(window.size());
    row.max_price = *std::max_element(window.begin(), window.end());
    row.moderate_correlated = row.max_price > moderate_value;
    if (row.moderate_correlated) ++audit.n_moderate_correlated;
    price_sum += row.mean_price;
    audit.rows.push_back(row);
  }
  if (!audit.rows.empty()) audit.mean_price = price_sum / static_cast<double>(audit.rows.size());
  return audit;
}

std::string audit_to_csv(const FalsePositiveAudit& audit) {
  std::string out = "segment_id,probability,mean_price,max_price,moderate_correlated\n";
  for (const auto& r : audit.rows) {
    out += std::to_string(r.segment_id) + "," + format_double(r.probability) + "," +
           format_double(r.mean_price) + "," + format_double(r.max_price) + "," +
           (r.moderate_correlated ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace spikelens
