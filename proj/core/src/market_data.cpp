#include "spikelens/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>

#include "spikelens/error.hpp"

namespace spikelens {
namespace {

std::string lower_alnum(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(DriverCategory category) {
  switch (category) {
    case DriverCategory::Congestion: return "Congestion";
    case DriverCategory::DayAhead: return "DayAhead";
    case DriverCategory::ForecastError: return "ForecastError";
    case DriverCategory::Generation: return "Generation";
    case DriverCategory::RegulationPrices: return "RegulationPrices";
    case DriverCategory::Others: return "Others";
  }
  return "Others";
}

std::optional<DriverCategory> parse_category(std::string_view text) {
  const std::string key = lower_alnum(text);
  if (key == "congestion") return DriverCategory::Congestion;
  if (key == "dayahead") return DriverCategory::DayAhead;
  if (key == "forecasterror" || key == "forecastingerror") return DriverCategory::ForecastError;
  if (key == "generation") return DriverCategory::Generation;
  if (key == "regulationprices" || key == "regulation") return DriverCategory::RegulationPrices;
  if (key == "others" || key == "other") return DriverCategory::Others;
  return std::nullopt;
}

ChannelSchema ChannelSchema::parse(std::string_view text) {
  ChannelSchema schema;
  int line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "schema line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::InvalidConfig, where + "expected name = ...");
    ChannelMeta meta;
    meta.name = std::string(trim(line.substr(0, eq)));
    if (meta.name.empty()) fail(ErrorCode::InvalidConfig, where + "empty channel name");
    const auto fields = split(line.substr(eq + 1), '|');
    if (fields.size() < 3 || fields.size() > 4) {
      fail(ErrorCode::InvalidConfig, where + "expected category | unit | role [| hourly]");
    }
    auto category = parse_category(trim(fields[0]));
    if (!category) {
      fail(ErrorCode::InvalidConfig, where + "unknown category '" + std::string(trim(fields[0])) + "'");
    }
    meta.category = *category;
    meta.unit = std::string(trim(fields[1]));
    const std::string role(trim(fields[2]));
    if (role == "price") {
      meta.is_price_signal = true;
    } else if (role != "feature") {
      fail(ErrorCode::InvalidConfig, where + "role must be 'price' or 'feature'");
    }
    if (fields.size() == 4) {
      if (trim(fields[3]) != "hourly") fail(ErrorCode::InvalidConfig, where + "expected 'hourly'");
      meta.hourly = true;
    }
    for (const auto& existing : schema.channels) {
      if (existing.name == meta.name) {
        fail(ErrorCode::InvalidConfig, where + "duplicate channel '" + meta.name + "'");
      }
    }
    schema.channels.push_back(std::move(meta));
  }
  const auto n_price = std::count_if(schema.channels.begin(), schema.channels.end(),
                                     [](const ChannelMeta& m) { return m.is_price_signal; });
  if (n_price != 1) {
    fail(ErrorCode::InvalidConfig,
         "schema must mark exactly one price channel, found " + std::to_string(n_price));
  }
  return schema;
}

ChannelSchema ChannelSchema::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

std::string ChannelSchema::to_text() const {
  std::string out = "# column = category | unit | role [| hourly]\n";
  for (const auto& m : channels) {
    out += m.name + " = " + std::string(to_string(m.category)) + " | " + m.unit + " | " +
           (m.is_price_signal ? "price" : "feature") + (m.hourly ? " | hourly" : "") + "\n";
  }
  return out;
}

MarketSeries::MarketSeries(UnixSeconds start, std::vector<ChannelMeta> channels, std::size_t length)
    : start_(start),
      length_(length),
      channels_(std::move(channels)),
      values_(channels_.size() * length, std::numeric_limits<double>::quiet_NaN()),
      missing_(channels_.size() * length, 1) {}

std::optional<std::size_t> MarketSeries::channel_index(std::string_view name) const {
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    if (channels_[c].name == name) return c;
  }
  return std::nullopt;
}

std::size_t MarketSeries::price_index() const {
  std::optional<std::size_t> found;
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    if (!channels_[c].is_price_signal) continue;
    if (found) fail(ErrorCode::InvalidConfig, "more than one price channel");
    found = c;
  }
  if (!found) fail(ErrorCode::InvalidConfig, "no price channel");
  return *found;
}

void MarketSeries::set(std::size_t row, std::size_t col, double v) {
  values_[col * length_ + row] = v;
  missing_[col * length_ + row] = 0;
}

void MarketSeries::set_missing(std::size_t row, std::size_t col) {
  values_[col * length_ + row] = std::numeric_limits<double>::quiet_NaN();
  missing_[col * length_ + row] = 1;
}

bool MarketSeries::any_missing(std::size_t col) const {
  const auto* first = missing_.data() + col * length_;
  return std::any_of(first, first + length_, [](unsigned char m) { return m != 0; });
}

bool MarketSeries::operator==(const MarketSeries& other) const {
  if (start_ != other.start_ || length_ != other.length_ || channels_ != other.channels_ ||
      missing_ != other.missing_) {
    return false;
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (missing_[i]) continue;
    if (std::memcmp(&values_[i], &other.values_[i], sizeof(double)) != 0) return false;
  }
  return true;
}

std::optional<GridPolicy> parse_grid_policy(std::string_view text) {
  if (text == "insert-missing") return GridPolicy::InsertMissing;
  if (text == "reject") return GridPolicy::Reject;
  return std::nullopt;
}

std::optional<FillPolicy> parse_fill_policy(std::string_view text) {
  if (text == "forward-fill") return FillPolicy::ForwardFill;
  if (text == "linear") return FillPolicy::Linear;
  if (text == "fail") return FillPolicy::Fail;
  return std::nullopt;
}

MarketSeries parse_csv(std::string_view text, const ChannelSchema& schema, GridPolicy grid) {
  struct Row {
    UnixSeconds t;
    std::vector<std::optional<double>> cells;
  };

  auto lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) fail(ErrorCode::EmptyFile, "no header row");

  std::string_view header_line = lines.front();
  if (header_line.starts_with("\xEF\xBB\xBF")) header_line.remove_prefix(3);
  const auto header = split(trim(header_line), ',');
  if (trim(header[0]) != "timestamp") {
    fail(ErrorCode::MissingColumn, "first column must be 'timestamp'");
  }
  std::vector<std::size_t> source_column;
  for (const auto& meta : schema.channels) {
    std::optional<std::size_t> found;
    for (std::size_t i = 1; i < header.size(); ++i) {
      if (trim(header[i]) == meta.name) found = i;
    }
    if (!found) fail(ErrorCode::MissingColumn, "column '" + meta.name + "' not in CSV header");
    source_column.push_back(*found);
  }

  std::vector<Row> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    std::string_view line = trim(lines[li]);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    const std::string where = "line " + std::to_string(li + 1) + ": ";
    if (cells.size() != header.size()) {
      fail(ErrorCode::BadNumber, where + "expected " + std::to_string(header.size()) + " cells");
    }
    auto t = parse_timestamp(cells[0]);
    if (!t) fail(ErrorCode::BadTimestamp, where + "cannot parse '" + std::string(cells[0]) + "'");
    Row row{*t, {}};
    for (std::size_t src : source_column) {
      std::string_view cell = trim(cells[src]);
      if (cell.empty()) {
        row.cells.emplace_back();
        continue;
      }
      auto v = parse_double(cell);
      if (!v || !std::isfinite(*v)) {
        fail(ErrorCode::BadNumber, where + "not a number: '" + std::string(cell) + "'");
      }
      row.cells.emplace_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::EmptyFile, "no data rows");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const UnixSeconds gap = rows[i].t - rows[i - 1].t;
    if (gap == 0) {
      fail(ErrorCode::DuplicateTimestamp, "duplicate timestamp " + format_timestamp(rows[i].t));
    }
    if (gap % MarketSeries::kInterval != 0) {
      fail(ErrorCode::NonUniformGrid, "gap before " + format_timestamp(rows[i].t) +
                                          " is not a multiple of 5 minutes");
    }
    if (gap != MarketSeries::kInterval && grid == GridPolicy::Reject) {
      fail(ErrorCode::NonUniformGrid, "missing rows before " + format_timestamp(rows[i].t));
    }
  }

  const UnixSeconds start = rows.front().t;
  const auto length =
      static_cast<std::size_t>((rows.back().t - start) / MarketSeries::kInterval) + 1;
  MarketSeries series(start, schema.channels, length);
  for (const auto& row : rows) {
    const auto r = static_cast<std::size_t>((row.t - start) / MarketSeries::kInterval);
    for (std::size_t c = 0; c < row.cells.size(); ++c) {
      if (row.cells[c]) series.set(r, c, *row.cells[c]);
    }
  }

  // Step-expand hourly channels: a missing cell takes the value stamped at
  // the top of its hour, when that row exists.
  for (std::size_t c = 0; c < series.n_channels(); ++c) {
    if (!series.channel(c).hourly) continue;
    for (std::size_t r = 0; r < length; ++r) {
      if (!series.missing(r, c)) continue;
      const UnixSeconds t = series.timestamp(r);
      const UnixSeconds hour = t - ((t % 3600) + 3600) % 3600;
      if (hour < start) continue;
      const auto hr = static_cast<std::size_t>((hour - start) / MarketSeries::kInterval);
      if (!series.missing(hr, c)) series.set(r, c, series.value(hr, c));
    }
  }
  return series;
}

MarketSeries load_csv(const std::filesystem::path& path, const ChannelSchema& schema,
                      GridPolicy grid) {
  if (!std::filesystem::exists(path)) {
    fail(ErrorCode::IoFailure, "input CSV not found: " + path.string());
  }
  return parse_csv(read_file(path), schema, grid);
}

std::string to_csv(const MarketSeries& series) {
  std::string out = "timestamp";
  for (const auto& m : series.channels()) out += "," + m.name;
  out += "\n";
  for (std::size_t r = 0; r < series.length(); ++r) {
    out += format_timestamp(series.timestamp(r));
    for (std::size_t c = 0; c < series.n_channels(); ++c) {
      out += ",";
      if (!series.missing(r, c)) out += format_double(series.value(r, c));
    }
    out += "\n";
  }
  return out;
}

MarketSeries fill_gaps(const MarketSeries& series, FillPolicy policy) {
  MarketSeries out = series;
  const std::size_t n = series.length();
  for (std::size_t c = 0; c < series.n_channels(); ++c) {
    if (!series.any_missing(c)) continue;
    const auto& meta = series.channel(c);
    if (meta.is_price_signal) {
      fail(ErrorCode::MissingPriceValue,
           "price channel '" + meta.name + "' has missing values; prices are never filled");
    }
    if (policy == FillPolicy::Fail) {
      fail(ErrorCode::MissingValue, "channel '" + meta.name + "' has missing values");
    }
    if (series.missing(0, c)) {
      fail(ErrorCode::UnfillableLeadingGap,
           "channel '" + meta.name + "' is missing before its first observation");
    }
    std::size_t last = 0;  // last observed row
    for (std::size_t r = 1; r < n; ++r) {
      if (!series.missing(r, c)) {
        if (policy == FillPolicy::Linear && r - last > 1) {
          const double a = series.value(last, c);
          const double b = series.value(r, c);
          const double span = static_cast<double>(r - last);
          for (std::size_t k = last + 1; k < r; ++k) {
            out.set(k, c, a + (b - a) * static_cast<double>(k - last) / span);
          }
        }
        last = r;
      } else if (policy == FillPolicy::ForwardFill) {
        out.set(r, c, series.value(last, c));
      }
    }
    // Trailing gap: nothing to interpolate toward, so hold the last value.
    if (policy == FillPolicy::Linear) {
      for (std::size_t k = last + 1; k < n; ++k) out.set(k, c, series.value(last, c));
    }
  }
  return out;
}

MarketSeries ingest(const std::filesystem::path& csv, const ChannelSchema& schema, GridPolicy grid,
                    FillPolicy fill) {
  return fill_gaps(load_csv(csv, schema, grid), fill);
}

}  // namespace spikelens
