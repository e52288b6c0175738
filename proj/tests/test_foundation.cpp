#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "spikelens/config.hpp"
#include "spikelens/error.hpp"
#include "spikelens/rng.hpp"
#include "spikelens/text.hpp"

using namespace spikelens;

TEST_SUITE("foundation") {
  TEST_CASE("shortest double formatting round-trips bit-exactly") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
      const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-8.0, 8.0));
      const auto back = parse_double(format_double(v));
      REQUIRE(back.has_value());
      CHECK(*back == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_fixed(-0.0, 2) == "0.00");
    CHECK(format_fixed(1.005, 1) == "1.0");
  }

  TEST_CASE("number parsing rejects junk") {
    CHECK_FALSE(parse_double("").has_value());
    CHECK_FALSE(parse_double("1.5x").has_value());
    CHECK(parse_double(" 2.5 ").value() == 2.5);
    CHECK(parse_int("+12").value() == 12);
    CHECK_FALSE(parse_int("1.0").has_value());
  }

  TEST_CASE("timestamps parse ISO-8601 variants and format as UTC") {
    const auto t = parse_timestamp("2021-07-15T17:30:00Z");
    REQUIRE(t.has_value());
    CHECK(*t == 1626370200);
    CHECK(parse_timestamp("2021-07-15 17:30").value() == *t);
    CHECK(parse_timestamp("2021-07-15T17:30:00+00:00").value() == *t);
    CHECK(format_timestamp(*t) == "2021-07-15T17:30:00Z");
    CHECK_FALSE(parse_timestamp("2021-13-01T00:00").has_value());
    CHECK_FALSE(parse_timestamp("yesterday").has_value());
    const auto c = to_civil(*t);
    CHECK(c.year == 2021);
    CHECK(c.month == 7u);
    CHECK(c.hour == 17);
    CHECK(from_civil(c) == *t);
  }

  TEST_CASE("config parsing handles sections and comments") {
    const auto kv = KeyValueConfig::parse(
        "# comment\nseed = 7\n; other comment\n[forest]\nn_trees = 12\nclass_weighting = off\n");
    CHECK(kv.get_int("seed", 0) == 7);
    CHECK(kv.get_int("forest.n_trees", 0) == 12);
    CHECK_FALSE(kv.get_bool("forest.class_weighting", true));
    CHECK(kv.get_double("missing", 1.5) == 1.5);
    CHECK_THROWS_AS(KeyValueConfig::parse("novalue\n"), Error);
    CHECK_THROWS_AS(kv.get_bool("seed", false), Error);
    CHECK(KeyValueConfig::parse(kv.to_text()).entries() == kv.entries());
  }

  TEST_CASE("error codes map onto exit classes") {
    CHECK(classify(ErrorCode::InvalidConfig) == ErrorClass::Config);
    CHECK(classify(ErrorCode::InvalidHyperparams) == ErrorClass::Config);
    CHECK(classify(ErrorCode::MissingColumn) == ErrorClass::Data);
    CHECK(classify(ErrorCode::IoFailure) == ErrorClass::Pipeline);
    CHECK(classify(ErrorCode::StageNotReady) == ErrorClass::Pipeline);
    try {
      fail(ErrorCode::TooFewRows, "three rows");
    } catch (const Error& e) {
      CHECK(std::string(e.what()) == "TooFewRows: three rows");
      CHECK(e.detail() == "three rows");
      CHECK(e.code() == ErrorCode::TooFewRows);
    }
  }

  TEST_CASE("rng streams are reproducible and derived seeds differ") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    CHECK(derive_seed(1, "train") != derive_seed(1, "cluster"));
    CHECK(derive_seed(1, "train") == derive_seed(1, "train"));
    CHECK(derive_seed(1, std::uint64_t{0}) != derive_seed(1, std::uint64_t{1}));
    Rng c(3);
    std::set<std::size_t> seen;
    for (int i = 0; i < 2000; ++i) {
      const auto v = c.index(10);
      CHECK(v < 10);
      seen.insert(v);
    }
    CHECK(seen.size() == 10);
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const double z = c.normal();
      sum += z;
      sq += z * z;
    }
    CHECK(std::fabs(sum / 20000) < 0.05);
    CHECK(std::fabs(sq / 20000 - 1.0) < 0.05);
  }
}
