#include "spikelens/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "spikelens/error.hpp"
#include "spikelens/rng.hpp"
#include "spikelens/spike_detector.hpp"

namespace spikelens {
namespace {

constexpr std::size_t kPerDay = 288;
constexpr double kBasePrice = 40.0;
constexpr double kPriceLow = 15.0;
constexpr double kPriceHigh = 70.0;
constexpr double kSpikeFloor = 75.0;
constexpr double kPeakLow = 150.0;
constexpr double kPeakHigh = 250.0;
constexpr double kShoulderLow = 100.0;
constexpr double kShoulderHigh = 110.0;
constexpr double kShoulderStep = 10.0;
constexpr std::size_t kMaxShoulderPerSide = 3;
constexpr std::size_t kMinSeparation = 36;  // intervals between event ranges

struct ChannelStyle {
  const char* prefix;
  const char* unit;
};

ChannelStyle style_of(DriverCategory c) {
  switch (c) {
    case DriverCategory::Congestion: return {"mcc", "$/MWh"};
    case DriverCategory::DayAhead: return {"da_lmp", "$/MWh"};
    case DriverCategory::ForecastError: return {"fcst_err", "MW"};
    case DriverCategory::Generation: return {"gen", "MW"};
    case DriverCategory::RegulationPrices: return {"reg_up", "$/MW"};
    case DriverCategory::Others: return {"demand", "MW"};
  }
  return {"other", ""};
}

double stddev(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double clamped_normal(Rng& rng, double limit) { return std::clamp(rng.normal(), -limit, limit); }

}  // namespace

Scenario generate(const SynthConfig& config) {
  if (config.days < 2) fail(ErrorCode::InvalidConfig, "synth: days must be at least 2");
  if (config.channels_per_category < 1) {
    fail(ErrorCode::InvalidConfig, "synth: need at least one channel per category");
  }
  if (config.start % 3600 != 0) {
    fail(ErrorCode::InvalidConfig, "synth: start must be on an hour boundary");
  }
  if (!(config.signal_strength >= 5.0)) {
    fail(ErrorCode::InvalidConfig, "synth: signal_strength must be at least 5");
  }
  const std::size_t n = config.days * kPerDay;
  const std::size_t n_events = config.events_per_category * kAllCategories.size();
  // Positions strictly above the Q-99 order statistic.
  const auto q99_rank = static_cast<std::size_t>(std::floor(0.99 * static_cast<double>(n - 1)));
  const std::size_t above = n - 1 - q99_rank;
  if (n_events > 0 && n_events + 1 > above) {
    fail(ErrorCode::InvalidConfig, "synth: " + std::to_string(n_events) +
                                       " events cannot all exceed the 99th percentile of " +
                                       std::to_string(n) + " intervals");
  }

  Scenario sc;
  sc.seed = config.seed;
  sc.spike_floor = kSpikeFloor;

  // Schema: price first, then each category's channels.
  sc.schema.channels.push_back(ChannelMeta{"mce", "$/MWh", DriverCategory::Others, true, false});
  for (DriverCategory c : kAllCategories) {
    const auto style = style_of(c);
    for (std::size_t i = 1; i <= config.channels_per_category; ++i) {
      sc.schema.channels.push_back(ChannelMeta{std::string(style.prefix) + "_" + std::to_string(i),
                                               style.unit, c, false,
                                               c == DriverCategory::DayAhead});
    }
  }
  const std::size_t n_channels = sc.schema.channels.size();

  // Baselines.
  Rng base_rng(derive_seed(config.seed, "baseline"));
  std::vector<std::vector<double>> values(n_channels, std::vector<double>(n, 0.0));
  std::vector<double> levels(n_channels, 0.0);
  for (std::size_t c = 1; c < n_channels; ++c) {
    const double level = base_rng.uniform(20.0, 200.0);
    const double amp = level * base_rng.uniform(0.05, 0.2);
    const double phase = base_rng.uniform(0.0, 2.0 * M_PI);
    const double noise = level * base_rng.uniform(0.02, 0.05);
    levels[c] = level;
    if (sc.schema.channels[c].hourly) {
      for (std::size_t h = 0; h * 12 < n; ++h) {
        const double v = level + amp * std::sin(2.0 * M_PI * static_cast<double>(h) / 24.0 + phase) +
                         noise * clamped_normal(base_rng, 4.0);
        for (std::size_t t = h * 12; t < std::min(n, h * 12 + 12); ++t) values[c][t] = v;
      }
    } else {
      for (std::size_t t = 0; t < n; ++t) {
        values[c][t] = level +
                       amp * std::sin(2.0 * M_PI * static_cast<double>(t) / kPerDay + phase) +
                       noise * clamped_normal(base_rng, 4.0);
      }
    }
  }
  // Direction in which each channel moves when it drives a spike.
  std::vector<double> direction(n_channels, 1.0);
  for (std::size_t c = 1; c < n_channels; ++c) direction[c] = base_rng.uniform() < 0.5 ? -1.0 : 1.0;
  sc.baseline_std.assign(n_channels, 0.0);
  for (std::size_t c = 1; c < n_channels; ++c) sc.baseline_std[c] = stddev(values[c]);

  const double price_phase = base_rng.uniform(0.0, 2.0 * M_PI);
  std::vector<double> coupling(n_channels, 0.0);
  for (std::size_t c = 1; c < n_channels; ++c) {
    coupling[c] = base_rng.uniform(0.5, 1.5) / static_cast<double>(n_channels - 1);
  }
  for (std::size_t t = 0; t < n; ++t) {
    double p = kBasePrice + 8.0 * std::sin(2.0 * M_PI * static_cast<double>(t) / kPerDay + price_phase);
    for (std::size_t c = 1; c < n_channels; ++c) {
      p += coupling[c] * (values[c][t] - levels[c]) / sc.baseline_std[c];
    }
    p += 1.5 * clamped_normal(base_rng, 4.0);
    values[0][t] = std::clamp(p, kPriceLow, kPriceHigh);
  }
  sc.baseline_std[0] = stddev(values[0]);

  // Events.
  Rng ev_rng(derive_seed(config.seed, "events"));
  std::vector<DriverCategory> categories;
  for (DriverCategory c : kAllCategories) {
    for (std::size_t i = 0; i < config.events_per_category; ++i) categories.push_back(c);
  }
  ev_rng.shuffle(categories.begin(), categories.end());

  // Shoulder budget: enough core points that Q-99 falls among them.
  std::vector<std::size_t> shoulders(n_events, 0);
  if (n_events > 0) {
    const std::size_t target = above + 3;
    std::size_t budget =
        std::min(target > n_events ? target - n_events : 0, n_events * 2 * kMaxShoulderPerSide);
    std::vector<std::size_t> order(n_events);
    for (std::size_t i = 0; i < n_events; ++i) order[i] = i;
    while (budget > 0) {
      ev_rng.shuffle(order.begin(), order.end());
      for (std::size_t i : order) {
        if (budget == 0) break;
        if (shoulders[i] < 2 * kMaxShoulderPerSide) {
          ++shoulders[i];
          --budget;
        }
      }
    }
  }

  struct Placement {
    std::size_t start, end, core_first, core_last, peak;
  };
  std::vector<Placement> placements;
  for (std::size_t e = 0; e < n_events; ++e) {
    const std::size_t left = shoulders[e] == 0 ? 0 : ev_rng.index(std::min(shoulders[e], kMaxShoulderPerSide) + 1);
    std::size_t right = shoulders[e] - left;
    std::size_t left_s = left;
    if (right > kMaxShoulderPerSide) {
      left_s += right - kMaxShoulderPerSide;
      right = kMaxShoulderPerSide;
    }
    const std::size_t lead = 1 + ev_rng.index(4);
    const std::size_t tail = 1 + ev_rng.index(4);
    const std::size_t span = lead + left_s + 1 + right + tail;
    bool placed = false;
    for (int attempt = 0; attempt < 100000 && !placed; ++attempt) {
      const std::size_t margin = 12;
      if (n < span + 2 * margin) break;
      const std::size_t start = margin + ev_rng.index(n - span - 2 * margin);
      const std::size_t end = start + span - 1;
      bool clash = false;
      for (const auto& p : placements) {
        if (start <= p.end + kMinSeparation && p.start <= end + kMinSeparation) {
          clash = true;
          break;
        }
      }
      if (clash) continue;
      const std::size_t peak = start + lead + left_s;
      placements.push_back({start, end, peak - left_s, peak + right, peak});
      placed = true;
    }
    if (!placed) {
      fail(ErrorCode::InvalidConfig, "synth: cannot place " + std::to_string(n_events) +
                                         " separated events in " + std::to_string(config.days) +
                                         " days");
    }
  }
  std::sort(placements.begin(), placements.end(),
            [](const Placement& a, const Placement& b) { return a.start < b.start; });

  for (std::size_t e = 0; e < placements.size(); ++e) {
    const auto& p = placements[e];
    InjectedEvent ev;
    ev.start = p.start;
    ev.end = p.end;
    ev.peak = p.peak;
    ev.core_first = p.core_first;
    ev.core_last = p.core_last;
    ev.categories.push_back(categories[e]);
    if (config.compound) {
      const auto primary = static_cast<std::size_t>(categories[e]);
      ev.categories.push_back(kAllCategories[(primary + 1 + ev_rng.index(5)) % 6]);
    }

    for (DriverCategory cat : ev.categories) {
      const double strength = ev_rng.uniform(config.signal_strength, 1.5 * config.signal_strength);
      for (std::size_t c = 1; c < n_channels; ++c) {
        if (sc.schema.channels[c].category != cat) continue;
        const double offset = direction[c] * strength * sc.baseline_std[c];
        std::size_t from = ev.start;
        std::size_t to = ev.end;
        if (sc.schema.channels[c].hourly) {
          from = from / 12 * 12;
          to = std::min(n - 1, to / 12 * 12 + 11);
        }
        for (std::size_t t = from; t <= to; ++t) values[c][t] += offset;
      }
    }

    const double baseline_at_peak = values[0][ev.peak];
    const double peak_price = ev_rng.uniform(kPeakLow, kPeakHigh);
    const double shoulder_top = ev_rng.uniform(kShoulderLow, kShoulderHigh);
    for (std::size_t t = ev.core_first; t <= ev.core_last; ++t) {
      if (t == ev.peak) {
        values[0][t] = peak_price;
      } else {
        const std::size_t dist = t < ev.peak ? ev.peak - t : t - ev.peak;
        values[0][t] = shoulder_top - kShoulderStep * static_cast<double>(dist - 1);
      }
    }
    ev.magnitude = peak_price - baseline_at_peak;
    sc.events.push_back(std::move(ev));
  }

  sc.series = MarketSeries(config.start, sc.schema.channels, n);
  for (std::size_t c = 0; c < n_channels; ++c) {
    for (std::size_t t = 0; t < n; ++t) sc.series.set(t, c, values[c][t]);
  }

  const double q99 = percentile(values[0], 99.0);
  for (const auto& ev : sc.events) {
    if (!(values[0][ev.peak] > q99)) {
      fail(ErrorCode::Internal, "synth: injected peak does not exceed the scenario Q-99");
    }
  }
  return sc;
}

std::string scenario_to_csv(const Scenario& scenario) {
  const auto& s = scenario.series;
  std::string out = "timestamp";
  for (const auto& m : s.channels()) out += "," + m.name;
  out += "\n";
  for (std::size_t r = 0; r < s.length(); ++r) {
    const UnixSeconds t = s.timestamp(r);
    out += format_timestamp(t);
    for (std::size_t c = 0; c < s.n_channels(); ++c) {
      out += ",";
      if (s.channel(c).hourly && t % 3600 != 0) continue;
      out += format_double(s.value(r, c));
    }
    out += "\n";
  }
  return out;
}

std::string ground_truth_to_csv(const Scenario& scenario) {
  std::string out = "event_id,start_ts,end_ts,peak_ts,categories,magnitude\n";
  for (std::size_t i = 0; i < scenario.events.size(); ++i) {
    const auto& e = scenario.events[i];
    std::string cats;
    for (DriverCategory c : e.categories) {
      if (!cats.empty()) cats += ";";
      cats += std::string(to_string(c));
    }
    out += std::to_string(i) + "," + format_timestamp(scenario.series.timestamp(e.start)) + "," +
           format_timestamp(scenario.series.timestamp(e.end)) + "," +
           format_timestamp(scenario.series.timestamp(e.peak)) + "," + cats + "," +
           format_double(e.magnitude) + "\n";
  }
  return out;
}

void write_scenario(const std::filesystem::path& dir, const Scenario& scenario) {
  write_file(dir / "data.csv", scenario_to_csv(scenario));
  write_file(dir / "schema.txt", scenario.schema.to_text());
  write_file(dir / "ground_truth.csv", ground_truth_to_csv(scenario));
  write_file(dir / "pipeline.conf", "# generated by spikelens synth\n"
                                    "input.csv = data.csv\n"
                                    "input.schema = schema.txt\n"
                                    "output.dir = out\n"
                                    "seed = " + std::to_string(scenario.seed) + "\n");
}

}  // namespace spikelens
