#include <doctest.h>

#include <algorithm>

#include "spikelens/driver_attrib.hpp"
#include "spikelens/error.hpp"
#include "support.hpp"

using namespace spikelens;

namespace {

struct Fixture {
  std::vector<ChannelMeta> channels = {
      {"mce", "$", DriverCategory::Others, true, false},
      {"mcc_a", "$", DriverCategory::Congestion, false, false},
      {"mcc_b", "$", DriverCategory::Congestion, false, false},
      {"reg_up", "$", DriverCategory::RegulationPrices, false, false},
      {"da", "$", DriverCategory::DayAhead, false, true},
  };
  std::vector<std::string> names = {"mcc_a__mean", "mcc_a__std", "mcc_b__max_grad",
                                    "reg_up__mean", "da__mean", "reg_up__std"};
  // 2021-07-15 00:00 UTC, one day.
  MarketSeries series{1626307200, channels, 288};
  Segment seg{SegmentLabel::Anomalous, 204, 216, std::size_t{0}};  // midpoint 17:30
};

}  // namespace

TEST_SUITE("driver-attrib") {
  TEST_CASE("single-category top features") {
    Fixture fx;
    Explanation e{4, 0.1, {0.3, 0.2, 0.1, -0.1, -0.2, 0.0}, 0.7};
    const auto r = attribute(e, fx.names, fx.channels, fx.seg, fx.series);
    REQUIRE(r.drivers.size() == 1);
    CHECK(r.drivers[0] == DriverCategory::Congestion);
    CHECK(r.top_features.size() == 3);
    CHECK(r.segment_id == 4);
    CHECK(r.season == Season::Summer);
    CHECK(r.daytime == Daytime::Evening);
  }

  TEST_CASE("multi-label drivers across categories; top-5 cap") {
    Fixture fx;
    Explanation e{1, 0.1, {0.3, 0.01, 0.02, 0.25, 0.03, 0.04}, 0.9};
    const auto r = attribute(e, fx.names, fx.channels, fx.seg, fx.series);
    CHECK(r.top_features.size() == 5);
    CHECK(r.has(DriverCategory::Congestion));
    CHECK(r.has(DriverCategory::RegulationPrices));
    CHECK(r.has(DriverCategory::DayAhead));
    // mcc_a__std (0.01) is the sixth and is cut.
    for (const auto& f : r.top_features) CHECK(f.feature != "mcc_a__std");
    for (const auto& f : r.top_features) CHECK(f.phi > 0.0);
  }

  TEST_CASE("permuting feature order keeps the driver set") {
    Fixture fx;
    Explanation e{1, 0.1, {0.3, 0.01, 0.02, 0.25, 0.03, 0.04}, 0.9};
    const std::vector<std::size_t> perm = {5, 3, 1, 0, 4, 2};
    Explanation p = e;
    std::vector<std::string> names(6);
    for (std::size_t i = 0; i < 6; ++i) {
      p.phi[i] = e.phi[perm[i]];
      names[i] = fx.names[perm[i]];
    }
    const auto a = attribute(e, fx.names, fx.channels, fx.seg, fx.series);
    const auto b = attribute(p, names, fx.channels, fx.seg, fx.series);
    CHECK(a.drivers == b.drivers);
  }

  TEST_CASE("no positive phi gives an empty driver set; unknown channel throws") {
    Fixture fx;
    Explanation e{1, 0.1, {-0.3, 0, 0, 0, 0, 0}, 0.0};
    const auto r = attribute(e, fx.names, fx.channels, fx.seg, fx.series);
    CHECK(r.drivers.empty());
    std::vector<std::string> bad = fx.names;
    bad[0] = "ghost__mean";
    Explanation g{1, 0.1, {0.3, 0, 0, 0, 0, 0}, 0.4};
    CHECK_THROWS_AS(attribute(g, bad, fx.channels, fx.seg, fx.series), Error);
  }

  TEST_CASE("aggregate percentages") {
    DriverReport a, b;
    a.drivers = {DriverCategory::Congestion};
    b.drivers = {DriverCategory::Congestion, DriverCategory::DayAhead};
    const std::vector<DriverReport> rs = {a, b};
    const auto s = aggregate(rs);
    CHECK(s.n_segments == 2);
    CHECK(s.percent[static_cast<int>(DriverCategory::Congestion)] == 100.0);
    CHECK(s.percent[static_cast<int>(DriverCategory::DayAhead)] == 50.0);
    CHECK(s.percent[static_cast<int>(DriverCategory::Generation)] == 0.0);
    const auto empty = aggregate({});
    CHECK(empty.n_segments == 0);
    for (double p : empty.percent) CHECK(p == 0.0);
  }

  TEST_CASE("aggregate counts unattributed reports, channels and season/daytime cells") {
    Fixture fx;
    std::vector<DriverReport> rs;
    rs.push_back(attribute(Explanation{1, 0, {0.3, 0, 0.2, 0, 0, 0}, 0.5}, fx.names, fx.channels, fx.seg, fx.series));
    rs.push_back(attribute(Explanation{2, 0, {-1, 0, 0, 0, 0, 0}, 0.5}, fx.names, fx.channels, fx.seg, fx.series));
    const auto s = aggregate(rs);
    CHECK(s.n_unattributed == 1);
    const auto cong = static_cast<int>(DriverCategory::Congestion);
    CHECK(s.segments_with[cong] == 1);
    CHECK(s.channel_counts[cong].at("mcc_a") == 1);
    CHECK(s.channel_counts[cong].at("mcc_b") == 1);
    CHECK(s.by_season_daytime[cong][static_cast<int>(Season::Summer)][static_cast<int>(Daytime::Evening)] == 1);
    for (double p : s.percent) {
      CHECK(p >= 0.0);
      CHECK(p <= 100.0);
    }
  }

  TEST_CASE("driver tables always list six categories") {
    const auto s = aggregate({});
    const auto csv = drivers_to_csv(s);
    CHECK(csv.rfind("category,segments,pct\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    const auto grid = drivers_by_season_daytime_to_csv(s);
    CHECK(grid.rfind("category,season,daytime,segments,pct\n", 0) == 0);
    CHECK(std::count(grid.begin(), grid.end(), '\n') == 1 + 6 * 16);
  }
}
