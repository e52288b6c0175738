#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "spikelens/config.hpp"
#include "spikelens/error.hpp"
#include "spikelens/spike_detector.hpp"
#include "spikelens/synthgen.hpp"
#include "spikelens/text.hpp"
#include "support.hpp"

using namespace spikelens;

namespace {

SynthConfig small(std::uint64_t seed) {
  SynthConfig c;
  c.days = 14;
  c.events_per_category = 3;
  c.seed = seed;
  return c;
}

ErrorCode code_of(const SynthConfig& c) {
  try {
    generate(c);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

}  // namespace

TEST_SUITE("synthgen") {
  TEST_CASE("invalid configurations") {
    auto c = small(1);
    c.days = 1;
    CHECK(code_of(c) == ErrorCode::InvalidConfig);
    c = small(1);
    c.channels_per_category = 0;
    CHECK(code_of(c) == ErrorCode::InvalidConfig);
    c = small(1);
    c.start += 60;
    CHECK(code_of(c) == ErrorCode::InvalidConfig);
    c = small(1);
    c.signal_strength = 2;
    CHECK(code_of(c) == ErrorCode::InvalidConfig);
    c = small(1);
    c.days = 2;
    c.events_per_category = 20;  // far more than fit above the 99th percentile
    CHECK(code_of(c) == ErrorCode::InvalidConfig);
  }

  TEST_CASE("schema layout and series shape") {
    auto c = small(2);
    c.channels_per_category = 2;
    const auto s = generate(c);
    CHECK(s.series.length() == 14 * 288);
    CHECK(s.series.n_channels() == 1 + 6 * 2);
    CHECK(s.series.channel(s.series.price_index()).name == "mce");
    std::size_t hourly = 0;
    for (const auto& ch : s.series.channels()) {
      if (ch.hourly) {
        ++hourly;
        CHECK(ch.category == DriverCategory::DayAhead);
      }
    }
    CHECK(hourly == 2);
    for (std::size_t col = 0; col < s.series.n_channels(); ++col) CHECK(!s.series.any_missing(col));
  }

  TEST_CASE("same seed, same scenario; different seed, different scenario") {
    const auto a = generate(small(5));
    const auto b = generate(small(5));
    const auto c = generate(small(6));
    CHECK(a.series == b.series);
    CHECK(ground_truth_to_csv(a) == ground_truth_to_csv(b));
    CHECK(!(a.series == c.series));
  }

  TEST_CASE("every injected peak exceeds the price 99th percentile") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      const auto s = generate(small(seed));
      CHECK(s.events.size() == 18);
      const auto price = s.series.price();
      const double q99 = percentile(price, 99.0);
      for (const auto& e : s.events) {
        CHECK(price[e.peak] > q99);
        CHECK(e.core_first <= e.peak);
        CHECK(e.peak <= e.core_last);
        CHECK(e.start <= e.core_first);
        CHECK(e.core_last <= e.end);
        CHECK(e.magnitude > 0.0);
        for (std::size_t t = e.core_first; t <= e.core_last; ++t) CHECK(price[t] > s.spike_floor);
      }
      for (std::size_t i = 1; i < s.events.size(); ++i) CHECK(s.events[i - 1].end < s.events[i].start);
    }
  }

  TEST_CASE("each event's peak is the maximum of its detected run") {
    const auto s = generate(small(3));
    const auto price = s.series.price();
    const auto th = resolve_thresholds(s.series, ThresholdSpec{});
    const auto events = group_events(detect_points(price, th.high), price);
    CHECK(events.size() == s.events.size());
    for (const auto& truth : s.events) {
      const auto hit = std::find_if(events.begin(), events.end(), [&](const SpikeEvent& e) {
        return e.t_first <= truth.peak && truth.peak <= e.t_last;
      });
      REQUIRE(hit != events.end());
      CHECK(hit->peak_value == price[truth.peak]);
    }
  }

  TEST_CASE("categories are balanced; compound events carry two") {
    auto c = small(4);
    const auto s = generate(c);
    std::array<int, 6> primary{};
    for (const auto& e : s.events) {
      REQUIRE(e.categories.size() == 1);
      ++primary[static_cast<std::size_t>(e.categories[0])];
    }
    for (int n : primary) CHECK(n == 3);
    c.compound = true;
    for (const auto& e : generate(c).events) {
      REQUIRE(e.categories.size() == 2);
      CHECK(e.categories[0] != e.categories[1]);
    }
  }

  TEST_CASE("calm scenario has no events") {
    auto c = small(1);
    c.events_per_category = 0;
    const auto s = generate(c);
    CHECK(s.events.empty());
    for (double p : s.series.price()) CHECK(p < s.spike_floor);
  }

  TEST_CASE("CSV round-trips, hourly channels only on the hour") {
    const auto s = generate(small(7));
    const auto csv = scenario_to_csv(s);
    CHECK(parse_csv(csv, s.schema) == s.series);
    const auto lines = split(csv, '\n');
    CHECK(lines[1].find(",,") == std::string::npos);  // 00:00 row is full
    const bool gap = lines[2].find(",,") != std::string::npos || lines[2].ends_with(",");
    CHECK(gap);
  }

  TEST_CASE("ground truth and scenario directory") {
    const auto s = generate(small(8));
    const auto gt = ground_truth_to_csv(s);
    CHECK(gt.rfind("event_id,start_ts,end_ts,peak_ts,categories,magnitude\n", 0) == 0);
    CHECK(std::count(gt.begin(), gt.end(), '\n') == 19);
    const auto dir = testing::temp_dir("synth_dir");
    write_scenario(dir, s);
    for (const char* f : {"data.csv", "schema.txt", "ground_truth.csv", "pipeline.conf"}) {
      CHECK(std::filesystem::exists(dir / f));
    }
    const auto conf = KeyValueConfig::load(dir / "pipeline.conf");
    CHECK(conf.get_string("input.csv", "") == "data.csv");
    CHECK(conf.get_string("seed", "") == "8");
  }
}
