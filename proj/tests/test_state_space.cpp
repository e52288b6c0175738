#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spikelens/error.hpp"
#include "spikelens/spike_detector.hpp"
#include "spikelens/state_space.hpp"
#include "support.hpp"

using namespace spikelens;

TEST_SUITE("state-space") {
  TEST_CASE("window stats on small examples") {
    const std::vector<double> a = {1, 2, 3};
    const auto s = window_stats(a);
    CHECK(s.mean == 2.0);
    CHECK(s.std == 1.0);
    CHECK(s.avg_grad == 1.0);
    CHECK(s.max_grad == 1.0);
    const std::vector<double> b = {1, 5, 2};
    const auto t = window_stats(b);
    CHECK(t.avg_grad == 0.5);
    CHECK(t.max_grad == 4.0);
  }

  TEST_CASE("max_grad keeps the sign and takes the earliest on ties") {
    const std::vector<double> down = {5, 1, 2};
    CHECK(window_stats(down).max_grad == -4.0);
    const std::vector<double> tie = {0, 3, 0};
    CHECK(window_stats(tie).max_grad == 3.0);
    const std::vector<double> tie2 = {3, 0, 3};
    CHECK(window_stats(tie2).max_grad == -3.0);
  }

  TEST_CASE("constant window and too-short window") {
    const std::vector<double> c = {4, 4, 4, 4};
    const auto s = window_stats(c);
    CHECK(s.std == 0.0);
    CHECK(s.avg_grad == 0.0);
    CHECK(s.max_grad == 0.0);
    const std::vector<double> one = {1};
    CHECK_THROWS_AS(window_stats(one), Error);
  }

  TEST_CASE("random windows match the naive oracle; shift and scale properties") {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> w(12);
      for (auto& v : w) v = rng.uniform(-100, 100);
      const auto s = window_stats(w);
      const auto o = oracle::window_stats(w);
      CHECK(s.mean == doctest::Approx(o.mean).epsilon(1e-12));
      CHECK(s.std == doctest::Approx(o.std).epsilon(1e-12));
      CHECK(s.avg_grad == doctest::Approx(o.avg_grad).epsilon(1e-12));
      CHECK(s.max_grad == doctest::Approx(o.max_grad).epsilon(1e-12));
      CHECK(s.avg_grad == (w.back() - w.front()) / 11.0);

      const double c = rng.uniform(-50, 50);
      std::vector<double> shifted = w;
      for (auto& v : shifted) v += c;
      const auto sh = window_stats(shifted);
      CHECK(sh.mean == doctest::Approx(s.mean + c));
      CHECK(sh.std == doctest::Approx(s.std));
      CHECK(sh.avg_grad == doctest::Approx(s.avg_grad));
      CHECK(sh.max_grad == doctest::Approx(s.max_grad));

      const double k = rng.uniform(0.1, 10);
      std::vector<double> scaled = w;
      for (auto& v : scaled) v *= k;
      const auto sc = window_stats(scaled);
      CHECK(sc.mean == doctest::Approx(s.mean * k));
      CHECK(sc.std == doctest::Approx(s.std * k));
      CHECK(sc.avg_grad == doctest::Approx(s.avg_grad * k));
      CHECK(sc.max_grad == doctest::Approx(s.max_grad * k));
    }
  }

  TEST_CASE("feature names round-trip") {
    CHECK(feature_name("mcc_sce", FeatureStat::AvgGrad) == "mcc_sce__avg_grad");
    const auto p = parse_feature_name("da__lmp__max_grad");
    REQUIRE(p.has_value());
    CHECK(p->channel == "da__lmp");
    CHECK(p->stat == FeatureStat::MaxGrad);
    CHECK_FALSE(parse_feature_name("plain").has_value());
    CHECK_FALSE(parse_feature_name("x__median").has_value());
  }

  TEST_CASE("layout: four stats per channel, mean only for hourly, price excluded") {
    std::vector<ChannelMeta> ch = {{"mce", "$", DriverCategory::Others, true, false},
                                   {"a", "$", DriverCategory::Congestion, false, false},
                                   {"da", "$", DriverCategory::DayAhead, false, true}};
    MarketSeries s(0, ch, 4);
    const auto layout = feature_layout(s, {});
    REQUIRE(layout.size() == 5);
    CHECK(layout[0].name == "a__mean");
    CHECK(layout[3].name == "a__max_grad");
    CHECK(layout[4].name == "da__mean");
    CHECK(feature_layout(s, ChannelFilter{{"da"}}).size() == 1);
    CHECK_THROWS_AS(feature_layout(s, ChannelFilter{{"nope"}}), Error);
  }

  TEST_CASE("two segments, two channels give a 2x8 dataset") {
    std::vector<double> p(24, 1.0), a(24), b(24);
    for (std::size_t i = 0; i < 24; ++i) {
      a[i] = static_cast<double>(i);
      b[i] = static_cast<double>(i * i);
    }
    const auto s = testing::make_series(p, {a, b});
    std::vector<Segment> segs = {{SegmentLabel::Normal, 0, 11, std::nullopt},
                                 {SegmentLabel::Anomalous, 12, 23, std::size_t{0}}};
    const auto d = build_dataset(segs, s);
    CHECK(d.n_rows() == 2);
    CHECK(d.n_features() == 8);
    CHECK(d.label(0) == 0);
    CHECK(d.label(1) == 1);
    CHECK(d.segment_id(1) == 1);
    CHECK(d.at(0, 0) == 5.5);  // ch0 mean over 0..11
  }

  TEST_CASE("single-class dataset is rejected") {
    std::vector<double> p(24, 1.0), a(24, 2.0);
    const auto s = testing::make_series(p, {a});
    std::vector<Segment> segs = {{SegmentLabel::Normal, 0, 11, std::nullopt},
                                 {SegmentLabel::Normal, 12, 23, std::nullopt}};
    CHECK_THROWS_AS(build_dataset(segs, s), Error);
  }

  TEST_CASE("every dataset cell equals summarize on its segment") {
    Rng rng(2);
    const std::size_t n = 1200;
    std::vector<double> p(n, 1.0);
    std::vector<std::vector<double>> f(3, std::vector<double>(n));
    for (auto& c : f) {
      for (auto& v : c) v = rng.normal();
    }
    const auto s = testing::make_series(p, f);
    std::vector<Segment> segs;
    for (std::size_t i = 0; i + 12 <= n; i += 12) {
      segs.push_back({i % 120 == 0 ? SegmentLabel::Anomalous : SegmentLabel::Normal, i, i + 11, std::nullopt});
    }
    const auto d = build_dataset(segs, s);
    REQUIRE(d.n_rows() == segs.size());
    for (std::size_t r = 0; r < segs.size(); ++r) {
      const auto sv = summarize(segs[r], r, s);
      CHECK(sv.label == d.label(r));
      for (std::size_t c = 0; c < sv.values.size(); ++c) CHECK(sv.values[c] == d.at(r, c));
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const auto o = oracle::window_stats(s.column(ch + 1).subspan(segs[r].start, 12));
        CHECK(d.at(r, ch * 4 + 0) == doctest::Approx(o.mean).epsilon(1e-12));
        CHECK(d.at(r, ch * 4 + 3) == doctest::Approx(o.max_grad).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("dataset CSV round-trips bit-exactly") {
    const auto d = testing::random_dataset(50, 4, 1);
    const auto csv = d.to_csv();
    CHECK(csv.rfind("segment_id,f0,f1,f2,f3,label\n", 0) == 0);
    CHECK(Dataset::from_csv(csv) == d);
  }

  TEST_CASE("add_row checks the width") {
    Dataset d({"a", "b"});
    const std::vector<double> row = {1.0};
    CHECK_THROWS_AS(d.add_row(row, 0), Error);
  }
}
