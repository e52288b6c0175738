#include <doctest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "spikelens/error.hpp"
#include "spikelens/spike_detector.hpp"
#include "support.hpp"

using namespace spikelens;

TEST_SUITE("spike-detector") {
  TEST_CASE("constant series resolves to equal thresholds and is flagged degenerate") {
    const std::vector<double> p = {5, 5, 5, 5};
    const auto th = resolve_thresholds(p, ThresholdSpec{});
    CHECK(th.moderate == 5.0);
    CHECK(th.high == 5.0);
    CHECK(th.degenerate);
  }

  TEST_CASE("series 1..100 matches the sort-and-interpolate oracle") {
    std::vector<double> p;
    for (int i = 100; i >= 1; --i) p.push_back(i);
    const auto th = resolve_thresholds(p, ThresholdSpec{});
    CHECK(th.moderate == doctest::Approx(oracle::percentile(p, 95)).epsilon(1e-12));
    CHECK(th.high == doctest::Approx(oracle::percentile(p, 99)).epsilon(1e-12));
    CHECK(th.high == doctest::Approx(99.01));
    CHECK_FALSE(th.degenerate);
  }

  TEST_CASE("fixed mode passes values through verbatim") {
    const std::vector<double> p = {1, 2, 3};
    const auto th = resolve_thresholds(p, ThresholdSpec{ThresholdMode::Fixed, 59.68, 140.51});
    CHECK(th.moderate == 59.68);
    CHECK(th.high == 140.51);
  }

  TEST_CASE("threshold spec validation") {
    const std::vector<double> p = {1, 2, 3};
    CHECK_THROWS_AS(resolve_thresholds(p, ThresholdSpec{ThresholdMode::Percentile, 99, 95}), Error);
    CHECK_THROWS_AS(resolve_thresholds(p, ThresholdSpec{ThresholdMode::Percentile, 0, 99}), Error);
    CHECK_THROWS_AS(resolve_thresholds(p, ThresholdSpec{ThresholdMode::Percentile, 95, 100}), Error);
    CHECK_THROWS_AS(resolve_thresholds(p, ThresholdSpec{ThresholdMode::Fixed, 200, 100}), Error);
    CHECK(parse_threshold_mode("fixed") == ThresholdMode::Fixed);
    CHECK_FALSE(parse_threshold_mode("median").has_value());
  }

  TEST_CASE("detect_points uses strict exceedance") {
    const std::vector<double> p = {10, 200, 30};
    CHECK(detect_points(p, 140.51) == std::vector<std::size_t>{1});
    CHECK(detect_points(p, 500).empty());
    const std::vector<double> tie = {140.51, 140.52};
    CHECK(detect_points(tie, 140.51) == std::vector<std::size_t>{1});
  }

  TEST_CASE("detect_points on a long series equals a linear scan; monotone in the threshold") {
    Rng rng(3);
    std::vector<double> p(10000);
    for (auto& v : p) v = 50 + 20 * rng.normal();
    CHECK(detect_points(p, 80) == oracle::exceeding(p, 80));
    std::size_t prev = p.size() + 1;
    for (double h = 0; h <= 150; h += 5) {
      const auto n = detect_points(p, h).size();
      CHECK(n <= prev);
      prev = n;
    }
  }

  TEST_CASE("grouping splits on any gap") {
    const std::vector<std::size_t> pts = {4, 5, 6, 9};
    std::vector<double> prices(12, 0.0);
    prices[5] = 7.0;
    const auto ev = group_events(pts, prices);
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].t_first == 4);
    CHECK(ev[0].t_last == 6);
    CHECK(ev[0].duration_intervals() == 3);
    CHECK(ev[0].peak_value == 7.0);
    CHECK(ev[1].t_first == 9);
    CHECK(ev[1].duration_intervals() == 1);
    CHECK(group_events({}, prices).empty());
  }

  TEST_CASE("max_gap tolerates short gaps") {
    const std::vector<std::size_t> pts = {4, 5, 7, 10};
    std::vector<double> prices(12, 1.0);
    CHECK(group_events(pts, prices, 0).size() == 3);
    CHECK(group_events(pts, prices, 1).size() == 2);
    CHECK(group_events(pts, prices, 2).size() == 1);
  }

  TEST_CASE("random sparse points match the run-length oracle") {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::size_t> pts;
      for (std::size_t i = 0; i < 300; ++i) {
        if (rng.uniform() < 0.2) pts.push_back(i);
      }
      std::vector<double> prices(300, 1.0);
      const auto ev = group_events(pts, prices);
      const auto want = oracle::runs(pts);
      REQUIRE(ev.size() == want.size());
      for (std::size_t k = 0; k < ev.size(); ++k) {
        CHECK(ev[k].t_first == want[k].first);
        CHECK(ev[k].t_last == want[k].second);
        for (std::size_t j = 1; j < ev[k].points.size(); ++j) {
          CHECK(ev[k].points[j] == ev[k].points[j - 1] + 1);
        }
      }
    }
  }

  TEST_CASE("grouping is shift-invariant under prepended calm data") {
    Rng rng(4);
    std::vector<double> p(500);
    for (auto& v : p) v = rng.uniform(0, 100);
    std::vector<double> shifted(37, 0.0);
    shifted.insert(shifted.end(), p.begin(), p.end());
    const auto a = group_events(detect_points(p, 90), p);
    const auto b = group_events(detect_points(shifted, 90), shifted);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(b[i].t_first == a[i].t_first + 37);
      CHECK(b[i].t_last == a[i].t_last + 37);
    }
  }

  TEST_CASE("anomalous window follows the direct formula") {
    std::vector<double> prices(300, 0.0);
    const std::vector<std::size_t> pts = {100, 101, 102};
    const auto ev = group_events(pts, prices);
    const auto segs = segment(300, ev, 6, 6);
    const auto it = std::find_if(segs.begin(), segs.end(), [](const Segment& s) { return s.anomalous(); });
    REQUIRE(it != segs.end());
    CHECK(it->start == 94);
    CHECK(it->end == 108);
    CHECK(it->source_event == std::size_t{0});
  }

  TEST_CASE("overlapping windows merge and reference the earliest event") {
    std::vector<double> prices(300, 0.0);
    const std::vector<std::size_t> pts = {100, 110};
    const auto ev = group_events(pts, prices);
    REQUIRE(ev.size() == 2);
    const auto segs = segment(300, ev, 6, 6);
    std::vector<Segment> anomalous;
    for (const auto& s : segs) {
      if (s.anomalous()) anomalous.push_back(s);
    }
    REQUIRE(anomalous.size() == 1);
    CHECK(anomalous[0].start == 94);
    CHECK(anomalous[0].end == 116);
    CHECK(anomalous[0].source_event == std::size_t{0});
  }

  TEST_CASE("windows clip to the series bounds") {
    std::vector<double> prices(50, 0.0);
    const std::vector<std::size_t> pts = {2, 48};
    const auto segs = segment(50, group_events(pts, prices), 6, 6);
    CHECK(segs.front().anomalous());
    CHECK(segs.front().start == 0);
    CHECK(segs.front().end == 8);
    CHECK(segs.back().anomalous());
    CHECK(segs.back().start == 42);
    CHECK(segs.back().end == 49);
  }

  TEST_CASE("one-day series with two events equals the hand-enumerated tiling") {
    // 288 intervals; events at [50,51] and [200,200]; windows [44,57], [194,206].
    std::vector<double> prices(288, 0.0);
    const std::vector<std::size_t> pts = {50, 51, 200};
    const auto segs = segment(288, group_events(pts, prices), 6, 6);
    std::vector<std::pair<std::size_t, std::size_t>> expected;
    // [0,43]: 3 normal hours, tail 36..43 dropped
    for (std::size_t s = 0; s + 12 <= 44; s += 12) expected.emplace_back(s, s + 11);
    expected.emplace_back(44, 57);
    // [58,193]: 11 hours from 58, remainder 190..193 dropped
    for (std::size_t s = 58; s + 12 <= 194; s += 12) expected.emplace_back(s, s + 11);
    expected.emplace_back(194, 206);
    // [207,287]: 6 hours from 207, remainder 279..287 dropped
    for (std::size_t s = 207; s + 12 <= 288; s += 12) expected.emplace_back(s, s + 11);
    REQUIRE(segs.size() == expected.size());
    std::size_t covered = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      CHECK(segs[i].start == expected[i].first);
      CHECK(segs[i].end == expected[i].second);
      covered += segs[i].length();
    }
    // Uncovered remainders are all shorter than one hour.
    CHECK(covered + 8 + 4 + 9 == 288);
  }

  TEST_CASE("segments partition and cover every spike point") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 500 + rng.index(1500);
      std::vector<double> p(n);
      for (auto& v : p) v = rng.uniform() < 0.01 ? 200 : rng.uniform(0, 50);
      const auto pts = detect_points(p, 100);
      const auto segs = segment(n, group_events(pts, p), 6, 6);
      std::vector<int> owner(n, 0);
      for (const auto& s : segs) {
        CHECK(s.start <= s.end);
        CHECK(s.end < n);
        if (!s.anomalous()) CHECK(s.length() == kNormalSegmentLength);
        for (std::size_t i = s.start; i <= s.end; ++i) ++owner[i];
      }
      for (int o : owner) CHECK(o <= 1);
      for (std::size_t pt : pts) {
        bool inside = false;
        for (const auto& s : segs) inside |= s.anomalous() && s.start <= pt && pt <= s.end;
        CHECK(inside);
      }
      for (const auto& s : segs) {
        if (s.anomalous()) continue;
        for (std::size_t i = s.start; i <= s.end; ++i) CHECK(p[i] <= 100);
      }
    }
  }

  TEST_CASE("season and daytime buckets") {
    // 2021-07-15 17:30 UTC
    const UnixSeconds t = 1626370200;
    CHECK(season_of(t, 0) == Season::Summer);
    CHECK(daytime_of(t, 0) == Daytime::Evening);
    // UTC-8 turns it into 09:30 local.
    CHECK(daytime_of(t, -8) == Daytime::Morning);
    CHECK(daytime_of(t - 6 * 3600, 0) == Daytime::Midday);  // 11:30
    CHECK(daytime_of(t + 5 * 3600, 0) == Daytime::Night);    // 22:30
    CHECK(season_of(1609459200, 0) == Season::Winter);       // 2021-01-01
    CHECK(season_of(1617235200, 0) == Season::Spring);       // 2021-04-01
    CHECK(season_of(1633046400, 0) == Season::Fall);         // 2021-10-01
    // Local time crosses into a new month: 2021-11-30 20:00 UTC + 5h = Dec 1.
    CHECK(season_of(1638302400, 5) == Season::Winter);
  }

  TEST_CASE("event statistics: single event and empty list") {
    // Series starts 2021-07-15 00:00 UTC; index 210 = 17:30.
    std::vector<double> p(288, 1.0);
    const auto s = testing::make_series(p, {}, 1626307200);
    std::vector<SpikeEvent> ev = {SpikeEvent{210, 210, {210}, 1.0}};
    const auto st = event_statistics(ev, s, 0);
    CHECK(st.n_events == 1);
    CHECK(st.by_season_daytime[static_cast<int>(Season::Summer)][static_cast<int>(Daytime::Evening)] == 1);
    CHECK(st.duration_histogram.at(1) == 1);
    CHECK(st.fraction_longer_than_hour == 0.0);
    const auto empty = event_statistics({}, s, 0);
    CHECK(empty.n_events == 0);
    CHECK(empty.fraction_longer_than_hour == 0.0);
    for (auto c : empty.by_season) CHECK(c == 0);
  }

  TEST_CASE("event statistics match per-event classification") {
    Rng rng(8);
    std::vector<double> p(288 * 400, 1.0);
    const auto s = testing::make_series(p, {}, 1609459200);
    std::vector<SpikeEvent> ev;
    for (int i = 0; i < 300; ++i) {
      const std::size_t a = rng.index(p.size() - 30);
      const std::size_t len = 1 + rng.index(25);
      ev.push_back(SpikeEvent{a, a + len - 1, {}, 1.0});
    }
    const double tz = -7.0;
    const auto st = event_statistics(ev, s, tz);
    std::array<std::array<std::size_t, 4>, 4> grid{};
    std::size_t longer = 0;
    for (const auto& e : ev) {
      const UnixSeconds local = s.timestamp(e.t_first) - 7 * 3600;
      const auto c = to_civil(local);
      const int season = (c.month == 12 || c.month <= 2) ? 0 : c.month <= 5 ? 1 : c.month <= 8 ? 2 : 3;
      const int day = (c.hour >= 6 && c.hour < 11) ? 0 : (c.hour >= 11 && c.hour < 16) ? 1
                                                                : (c.hour >= 16 && c.hour < 22) ? 2 : 3;
      ++grid[season][day];
      if (e.duration_intervals() > 12) ++longer;
    }
    CHECK(st.by_season_daytime == grid);
    CHECK(st.fraction_longer_than_hour == doctest::Approx(static_cast<double>(longer) / 300.0));
  }

  TEST_CASE("events CSV has the documented header") {
    std::vector<double> p = {1, 300, 310, 1};
    const auto s = testing::make_series(p);
    const auto csv = events_to_csv(group_events(detect_points(p, 100), p), s);
    CHECK(csv.rfind("event_id,start_ts,end_ts,duration,peak\n", 0) == 0);
    CHECK(csv.find("0,2021-07-01T00:05:00Z,2021-07-01T00:10:00Z,2,310") != std::string::npos);
  }
}
