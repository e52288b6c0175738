#include "spikelens/reporter.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "spikelens/error.hpp"
#include "spikelens/state_space.hpp"
#include "spikelens/text.hpp"

namespace spikelens {
namespace {

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string coord(double v) { return format_fixed(v, 3); }

}  // namespace

std::string axis_label(std::string_view feature) {
  const auto parsed = parse_feature_name(feature);
  if (!parsed) return std::string(feature);
  switch (parsed->stat) {
    case FeatureStat::Mean: return parsed->channel + " μ";
    case FeatureStat::Std: return parsed->channel + " σ";
    case FeatureStat::AvgGrad: return parsed->channel + " δ̄";
    case FeatureStat::MaxGrad: return parsed->channel + " Δmax";
  }
  return std::string(feature);
}

std::vector<std::size_t> select_axes(std::span<const double> standardized, std::size_t m) {
  std::vector<std::size_t> idx(standardized.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(standardized[a]) > std::abs(standardized[b]);
  });
  if (idx.size() > m) idx.resize(m);
  return idx;
}

std::vector<RadarAxis> radar_axes(const ClusterModel& model, std::size_t cluster, std::size_t m) {
  if (cluster >= model.k) fail(ErrorCode::Internal, "cluster index out of range");
  const auto& centroid = model.centroids[cluster];
  const std::size_t available = std::min(m, centroid.size());
  if (available < 3) {
    fail(ErrorCode::TooFewAxes, "radar chart needs at least 3 axes, " +
                                    std::to_string(available) + " available");
  }
  const auto chosen = select_axes(centroid, available);
  const auto raw = model.raw_centroid(cluster);
  std::vector<RadarAxis> axes;
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const std::size_t f = chosen[k];
    double lo = model.centroids[0][f];
    double hi = lo;
    for (const auto& c : model.centroids) {
      lo = std::min(lo, c[f]);
      hi = std::max(hi, c[f]);
    }
    RadarAxis axis;
    axis.feature = f;
    axis.label = axis_label(model.scaler.names[f]);
    axis.value = raw[f];
    axis.radius = hi > lo ? RadarLayout::kFloor +
                                (1.0 - RadarLayout::kFloor) * (centroid[f] - lo) / (hi - lo)
                          : 1.0;
    const double angle = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(chosen.size());
    const double r = axis.radius * RadarLayout::kOuterRadius;
    axis.x = RadarLayout::kCenter + r * std::sin(angle);
    axis.y = RadarLayout::kCenter - r * std::cos(angle);
    axes.push_back(std::move(axis));
  }
  return axes;
}

std::string radar_svg(std::string_view title, std::span<const RadarAxis> axes) {
  if (axes.size() < 3) fail(ErrorCode::TooFewAxes, "radar chart needs at least 3 axes");
  const double c = RadarLayout::kCenter;
  const double outer = RadarLayout::kOuterRadius;
  const std::size_t m = axes.size();
  const auto ring_point = [&](std::size_t k, double frac) {
    const double angle = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(m);
    return std::pair{c + frac * outer * std::sin(angle), c - frac * outer * std::cos(angle)};
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"480\" height=\"480\" "
         "viewBox=\"0 0 480 480\">\n";
  svg += "<title>" + xml_escape(title) + "</title>\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"480\" height=\"480\" fill=\"#ffffff\"/>\n";
  svg += "<g id=\"grid\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\">\n";
  for (double frac : {0.25, 0.5, 0.75, 1.0}) {
    std::string pts;
    for (std::size_t k = 0; k < m; ++k) {
      const auto [x, y] = ring_point(k, frac);
      if (!pts.empty()) pts += " ";
      pts += coord(x) + "," + coord(y);
    }
    svg += "<polygon points=\"" + pts + "\"/>\n";
  }
  svg += "</g>\n<g id=\"axes\" stroke=\"#999999\" stroke-width=\"1\">\n";
  for (std::size_t k = 0; k < m; ++k) {
    const auto [x, y] = ring_point(k, 1.0);
    svg += "<line x1=\"" + coord(c) + "\" y1=\"" + coord(c) + "\" x2=\"" + coord(x) +
           "\" y2=\"" + coord(y) + "\"/>\n";
  }
  svg += "</g>\n";
  std::string pts;
  for (const auto& a : axes) {
    if (!pts.empty()) pts += " ";
    pts += coord(a.x) + "," + coord(a.y);
  }
  svg += "<polygon id=\"state\" points=\"" + pts +
         "\" fill=\"#d62728\" fill-opacity=\"0.35\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  svg += "<g id=\"labels\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
  for (std::size_t k = 0; k < m; ++k) {
    const auto [x, y] = ring_point(k, 1.12);
    const char* anchor = std::abs(x - c) < 1e-6 ? "middle" : (x > c ? "start" : "end");
    svg += "<text x=\"" + coord(x) + "\" y=\"" + coord(y) + "\" text-anchor=\"" + anchor + "\">" +
           xml_escape(axes[k].label) + "<title>" + xml_escape(axes[k].label) + " = " +
           format_double(axes[k].value) + "</title></text>\n";
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

std::string radar_chart(const ClusterModel& model, std::size_t cluster, std::size_t m) {
  const auto axes = radar_axes(model, cluster, m);
  return radar_svg("System state " + std::to_string(cluster) + " (" +
                       std::to_string(model.cluster_size(cluster)) + " segments)",
                   axes);
}

namespace {

bool has_radars(const ReportInputs& in) {
  return !in.events.empty() && in.clusters.has_value() && in.clusters->k > 0;
}

std::string radar_file(std::size_t cluster) {
  return "radar_cluster_" + std::to_string(cluster) + ".svg";
}

}  // namespace

std::vector<std::string> report_manifest(const ReportInputs& inputs) {
  std::vector<std::string> files = {"events.csv", "drivers.csv", "drivers_by_season_daytime.csv",
                                    "clusters.csv"};
  if (has_radars(inputs)) {
    for (std::size_t c = 0; c < inputs.clusters->k; ++c) files.push_back(radar_file(c));
  }
  files.push_back("effective_config.txt");
  files.push_back("summary.txt");
  return files;
}

std::string render_summary(const ReportInputs& in) {
  std::string s;
  const auto line = [&](const std::string& text) { s += text + "\n"; };
  line("spikelens summary v1");
  line("");
  line("[thresholds]");
  line("moderate = " + format_fixed(in.thresholds.moderate, 4));
  line("high = " + format_fixed(in.thresholds.high, 4));
  if (in.thresholds.degenerate) line("warning = moderate and high thresholds coincide");
  line("");
  line("[events]");
  line("events = " + std::to_string(in.events.size()));
  if (in.events.empty()) line("note = zero spike events detected; no model, drivers or clusters");
  line("segments = " + std::to_string(in.n_segments));
  line("anomalous_segments = " + std::to_string(in.n_anomalous_segments));
  line("longer_than_one_hour = " + format_fixed(100.0 * in.stats.fraction_longer_than_hour, 2) + "%");
  for (Season se : kAllSeasons) {
    std::string row = fmt::format("{:<8}", to_string(se));
    for (Daytime d : kAllDaytimes) {
      row += fmt::format(" {}={}", to_string(d),
                         in.stats.by_season_daytime[static_cast<std::size_t>(se)]
                                                   [static_cast<std::size_t>(d)]);
    }
    line(row);
  }
  std::string hist = "duration_histogram =";
  for (const auto& [dur, count] : in.stats.duration_histogram) {
    hist += " " + std::to_string(dur) + ":" + std::to_string(count);
  }
  line(hist);

  if (in.metrics) {
    const auto& m = *in.metrics;
    line("");
    line("[classifier]");
    line("accuracy = " + format_fixed(m.accuracy, 4));
    line("precision = " + format_fixed(m.precision, 4));
    line("recall = " + format_fixed(m.recall, 4));
    line("false_positive_rate = " + format_fixed(m.false_positive_rate, 4) + " (" +
         std::to_string(m.confusion.fp) + "/" + std::to_string(m.confusion.fp + m.confusion.tn) +
         ")");
    line(fmt::format("confusion = tp:{} fp:{} tn:{} fn:{}", m.confusion.tp, m.confusion.fp,
                     m.confusion.tn, m.confusion.fn));
  }
  if (in.audit) {
    line("");
    line("[false_positive_audit]");
    line("false_positives = " + std::to_string(in.audit->rows.size()));
    line("moderate_correlated = " + std::to_string(in.audit->n_moderate_correlated));
    line("mean_price = " + format_fixed(in.audit->mean_price, 2));
  }
  if (in.drivers) {
    const auto& d = *in.drivers;
    line("");
    line("[drivers]");
    line("spike_segments = " + std::to_string(d.n_segments));
    line("unattributed = " + std::to_string(d.n_unattributed));
    for (DriverCategory c : kAllCategories) {
      const auto ci = static_cast<std::size_t>(c);
      std::string row = fmt::format("{:<16} {:>7}%", to_string(c), format_fixed(d.percent[ci], 2));
      if (!d.channel_counts[ci].empty()) {
        row += "  channels:";
        for (const auto& [ch, n] : d.channel_counts[ci]) row += " " + ch + "=" + std::to_string(n);
      }
      line(row);
    }
  }
  if (in.elbow) {
    line("");
    line("[elbow]");
    std::string curve = "inertia =";
    for (std::size_t i = 0; i < in.elbow->ks.size(); ++i) {
      curve += " " + std::to_string(in.elbow->ks[i]) + ":" + format_fixed(in.elbow->inertia[i], 4);
    }
    line(curve);
    line("suggested_k = " + std::to_string(in.elbow->suggested_k));
  }
  if (in.clusters) {
    line("");
    line("[clusters]");
    line("k = " + std::to_string(in.clusters->k));
    line("inertia = " + format_fixed(in.clusters->inertia, 6));
    for (std::size_t c = 0; c < in.clusters->k; ++c) {
      line("cluster " + std::to_string(c) + " size = " + std::to_string(in.clusters->cluster_size(c)));
    }
    if (!in.clusters->scaler.dropped.empty()) {
      std::string dropped = "dropped_zero_variance =";
      for (const auto& n : in.clusters->scaler.dropped) dropped += " " + n;
      line(dropped);
    }
  }
  return s;
}

std::vector<std::string> render_report(const std::filesystem::path& dir,
                                       const ReportInputs& inputs) {
  if (!inputs.series) fail(ErrorCode::Internal, "report needs the market series");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    const auto name = entry.path().filename().string();
    if (name.starts_with("radar_cluster_") && name.ends_with(".svg")) {
      std::filesystem::remove(entry.path(), ec);
    }
  }

  write_file(dir / "events.csv", events_to_csv(inputs.events, *inputs.series));
  const DriverSummary drivers = inputs.drivers.value_or(DriverSummary{});
  write_file(dir / "drivers.csv", drivers_to_csv(drivers));
  write_file(dir / "drivers_by_season_daytime.csv", drivers_by_season_daytime_to_csv(drivers));
  write_file(dir / "clusters.csv",
             inputs.clusters ? centroids_to_csv(*inputs.clusters) : std::string("cluster,size\n"));
  if (has_radars(inputs)) {
    for (std::size_t c = 0; c < inputs.clusters->k; ++c) {
      write_file(dir / radar_file(c), radar_chart(*inputs.clusters, c, inputs.radar_axes));
    }
  }
  write_file(dir / "effective_config.txt", inputs.effective_config);
  write_file(dir / "summary.txt", render_summary(inputs));
  return report_manifest(inputs);
}

}  // namespace spikelens
