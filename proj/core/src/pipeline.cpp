#include "spikelens/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "spikelens/audit.hpp"
#include "spikelens/error.hpp"
#include "spikelens/explainer.hpp"
#include "spikelens/reporter.hpp"
#include "spikelens/rng.hpp"
#include "spikelens/text.hpp"

namespace spikelens {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d = {
      {"input.csv", ""},
      {"input.schema", ""},
      {"input.grid", "insert-missing"},
      {"input.fill", "forward-fill"},
      {"output.dir", "out"},
      {"threshold.mode", "percentile"},
      {"threshold.moderate", "95"},
      {"threshold.high", "99"},
      {"group.max_gap", "0"},
      {"segment.b_len", "6"},
      {"segment.f_len", "6"},
      {"tz_offset", "0"},
      {"features.channels", ""},
      {"seed", "42"},
      {"split.ratio", "0.67"},
      {"forest.n_trees", "200"},
      {"forest.max_depth", "12"},
      {"forest.min_samples_leaf", "2"},
      {"forest.mtry", "0"},
      {"forest.class_weighting", "true"},
      {"forest.stratified_bootstrap", "true"},
      {"forest.decision_threshold", "0.5"},
      {"drivers.top_k", "5"},
      {"drivers.min_phi", "0"},
      {"cluster.k", "0"},
      {"cluster.k_min", "2"},
      {"cluster.k_max", "15"},
      {"cluster.restarts", "10"},
      {"cluster.max_iter", "300"},
      {"cluster.tol", "1e-6"},
      {"cluster.anomalous_only", "false"},
      {"report.radar_axes", "8"},
  };
  return d;
}

std::size_t get_size(const KeyValueConfig& kv, const std::string& key) {
  const long long v = kv.get_int(key, 0);
  if (v < 0) fail(ErrorCode::InvalidConfig, key + " must not be negative");
  return static_cast<std::size_t>(v);
}

fs::path resolve(const fs::path& base, const std::string& value) {
  const fs::path p(value);
  return p.is_absolute() ? p : base / p;
}

// ---- work files ----

fs::path need(const PipelineConfig& cfg, std::string_view file, Stage producer) {
  fs::path p = cfg.work_dir() / file;
  if (!fs::exists(p)) {
    fail(ErrorCode::StageNotReady, fmt::format("missing {}; run the '{}' stage first", p.string(),
                                               to_string(producer)));
  }
  return p;
}

struct Loaded {
  ChannelSchema schema;
  MarketSeries series;
};

Loaded load_series(const PipelineConfig& cfg) {
  Loaded out;
  out.schema = ChannelSchema::parse(read_file(need(cfg, "schema.txt", Stage::Ingest)));
  out.series =
      parse_csv(read_file(need(cfg, "series.csv", Stage::Ingest)), out.schema, GridPolicy::Reject);
  return out;
}

std::string thresholds_to_text(const Thresholds& th, ThresholdMode mode) {
  KeyValueConfig kv;
  kv.set("mode", mode == ThresholdMode::Fixed ? "fixed" : "percentile");
  kv.set("moderate", format_double(th.moderate));
  kv.set("high", format_double(th.high));
  kv.set("degenerate", th.degenerate ? "true" : "false");
  return kv.to_text();
}

Thresholds load_thresholds(const PipelineConfig& cfg) {
  const auto kv = KeyValueConfig::load(need(cfg, "thresholds.txt", Stage::Detect));
  Thresholds th;
  th.moderate = kv.get_double("moderate", 0.0);
  th.high = kv.get_double("high", 0.0);
  th.degenerate = kv.get_bool("degenerate", false);
  return th;
}

std::vector<SpikeEvent> detect(const MarketSeries& series, const Thresholds& th, std::size_t max_gap) {
  const auto prices = series.price();
  const auto points = detect_points(prices, th.high);
  return group_events(points, prices, max_gap);
}

std::string segments_to_csv(std::span<const Segment> segments) {
  std::string out = "segment_id,label,start,end,source_event\n";
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    out += fmt::format("{},{},{},{},{}\n", i, s.anomalous() ? "anomalous" : "normal", s.start, s.end,
                       s.source_event ? std::to_string(*s.source_event) : "");
  }
  return out;
}

std::vector<Segment> load_segments(const PipelineConfig& cfg) {
  const auto path = need(cfg, "segments.csv", Stage::Detect);
  const std::string text = read_file(path);
  std::vector<Segment> out;
  bool header = true;
  for (auto line : split(text, '\n')) {
    line = trim(line);
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 5) fail(ErrorCode::Internal, "malformed " + path.string());
    Segment s;
    s.label = f[1] == "anomalous" ? SegmentLabel::Anomalous : SegmentLabel::Normal;
    const auto start = parse_int(f[2]);
    const auto end = parse_int(f[3]);
    if (!start || !end) fail(ErrorCode::Internal, "malformed " + path.string());
    s.start = static_cast<std::size_t>(*start);
    s.end = static_cast<std::size_t>(*end);
    if (!trim(f[4]).empty()) {
      const auto ev = parse_int(f[4]);
      if (!ev) fail(ErrorCode::Internal, "malformed " + path.string());
      s.source_event = static_cast<std::size_t>(*ev);
    }
    out.push_back(s);
  }
  return out;
}

bool any_anomalous(std::span<const Segment> segments) {
  return std::any_of(segments.begin(), segments.end(), [](const Segment& s) { return s.anomalous(); });
}

Dataset load_dataset(const PipelineConfig& cfg) {
  return Dataset::from_csv(read_file(need(cfg, "dataset.csv", Stage::Features)));
}

TrainTestSplit load_split(const PipelineConfig& cfg) {
  const auto path = need(cfg, "split.csv", Stage::Features);
  TrainTestSplit out;
  const std::string text = read_file(path);
  bool header = true;
  for (auto line : split(text, '\n')) {
    line = trim(line);
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split(line, ',');
    const auto row = f.size() == 2 ? parse_int(f[0]) : std::nullopt;
    if (!row) fail(ErrorCode::Internal, "malformed " + path.string());
    (f[1] == "train" ? out.train : out.test).push_back(static_cast<std::size_t>(*row));
  }
  return out;
}

std::string split_to_csv(const TrainTestSplit& split, std::size_t n_rows) {
  std::vector<const char*> set(n_rows, "test");
  for (std::size_t r : split.train) set[r] = "train";
  std::string out = "row,set\n";
  for (std::size_t r = 0; r < n_rows; ++r) out += fmt::format("{},{}\n", r, set[r]);
  return out;
}

std::string metrics_to_text(const Metrics& m, std::size_t n_train, std::size_t n_test) {
  KeyValueConfig kv;
  kv.set("n_train", std::to_string(n_train));
  kv.set("n_test", std::to_string(n_test));
  kv.set("tp", std::to_string(m.confusion.tp));
  kv.set("fp", std::to_string(m.confusion.fp));
  kv.set("tn", std::to_string(m.confusion.tn));
  kv.set("fn", std::to_string(m.confusion.fn));
  kv.set("accuracy", format_double(m.accuracy));
  kv.set("precision", format_double(m.precision));
  kv.set("recall", format_double(m.recall));
  kv.set("false_positive_rate", format_double(m.false_positive_rate));
  return kv.to_text();
}

std::string reports_to_csv(std::span<const DriverReport> reports) {
  std::string out = "segment_id,season,daytime,drivers,top_features\n";
  for (const auto& r : reports) {
    std::string drivers;
    for (DriverCategory c : r.drivers) {
      if (!drivers.empty()) drivers += ";";
      drivers += std::string(to_string(c));
    }
    std::string top;
    for (const auto& f : r.top_features) {
      if (!top.empty()) top += ";";
      top += f.feature + "=" + format_double(f.phi);
    }
    out += fmt::format("{},{},{},{},{}\n", r.segment_id, to_string(r.season), to_string(r.daytime),
                       drivers, top);
  }
  return out;
}

const Segment& segment_of(std::span<const Segment> segments, std::int64_t id) {
  if (id < 0 || static_cast<std::size_t>(id) >= segments.size()) {
    fail(ErrorCode::Internal, fmt::format("unknown segment id {}", id));
  }
  return segments[static_cast<std::size_t>(id)];
}

std::vector<DriverReport> driver_reports(const PipelineConfig& cfg,
                                         std::span<const Explanation> explanations,
                                         std::span<const std::string> names,
                                         std::span<const Segment> segments, const MarketSeries& series) {
  std::vector<DriverReport> reports;
  reports.reserve(explanations.size());
  for (const auto& e : explanations) {
    reports.push_back(attribute(e, names, series.channels(), segment_of(segments, e.segment_id), series,
                                cfg.drivers));
  }
  return reports;
}

Dataset cluster_input(const PipelineConfig& cfg, const Dataset& data) {
  if (!cfg.cluster_anomalous_only) return data;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    if (data.label(i) == 1) rows.push_back(i);
  }
  return data.subset(rows);
}

json cluster_to_json(const ClusterModel& m, const std::optional<ElbowResult>& elbow) {
  json j;
  j["format"] = "spikelens.clusters";
  j["version"] = 1;
  j["k"] = m.k;
  j["kept"] = m.scaler.kept;
  j["names"] = m.scaler.names;
  j["means"] = m.scaler.means;
  j["stds"] = m.scaler.stds;
  j["dropped"] = m.scaler.dropped;
  j["centroids"] = m.centroids;
  j["assignments"] = m.assignments;
  j["inertia"] = m.inertia;
  j["iterations"] = m.iterations;
  if (elbow) {
    j["elbow"] = {{"ks", elbow->ks}, {"inertia", elbow->inertia}, {"suggested_k", elbow->suggested_k}};
  } else {
    j["elbow"] = nullptr;
  }
  return j;
}

std::pair<ClusterModel, std::optional<ElbowResult>> cluster_from_json(const std::string& text,
                                                                      const fs::path& origin) {
  try {
    const json j = json::parse(text);
    ClusterModel m;
    m.k = j.at("k").get<std::size_t>();
    m.scaler.kept = j.at("kept").get<std::vector<std::size_t>>();
    m.scaler.names = j.at("names").get<std::vector<std::string>>();
    m.scaler.means = j.at("means").get<std::vector<double>>();
    m.scaler.stds = j.at("stds").get<std::vector<double>>();
    m.scaler.dropped = j.at("dropped").get<std::vector<std::string>>();
    m.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
    m.assignments = j.at("assignments").get<std::vector<std::size_t>>();
    m.inertia = j.at("inertia").get<double>();
    m.iterations = j.at("iterations").get<std::size_t>();
    std::optional<ElbowResult> elbow;
    if (!j.at("elbow").is_null()) {
      ElbowResult e;
      e.ks = j["elbow"].at("ks").get<std::vector<std::size_t>>();
      e.inertia = j["elbow"].at("inertia").get<std::vector<double>>();
      e.suggested_k = j["elbow"].at("suggested_k").get<std::size_t>();
      elbow = std::move(e);
    }
    return {std::move(m), std::move(elbow)};
  } catch (const json::exception& e) {
    fail(ErrorCode::Internal, "malformed " + origin.string() + ": " + e.what());
  }
}

// ---- stages ----

void stage_ingest(const PipelineConfig& cfg) {
  const auto schema = ChannelSchema::load(cfg.input_schema);
  const auto series = ingest(cfg.input_csv, schema, cfg.grid, cfg.fill);
  write_file(cfg.work_dir() / "schema.txt", schema.to_text());
  write_file(cfg.work_dir() / "series.csv", to_csv(series));
  spdlog::info("ingest: {} intervals x {} channels", series.length(), series.n_channels());
}

void stage_detect(const PipelineConfig& cfg) {
  const auto in = load_series(cfg);
  const auto th = resolve_thresholds(in.series, cfg.thresholds);
  const auto events = detect(in.series, th, cfg.max_gap);
  const auto segments = segment(in.series.length(), events, cfg.b_len, cfg.f_len);
  write_file(cfg.work_dir() / "thresholds.txt", thresholds_to_text(th, cfg.thresholds.mode));
  write_file(cfg.work_dir() / "events.csv", events_to_csv(events, in.series));
  write_file(cfg.work_dir() / "segments.csv", segments_to_csv(segments));
  spdlog::info("detect: high={} moderate={}, {} events, {} segments", th.high, th.moderate,
               events.size(), segments.size());
}

void stage_features(const PipelineConfig& cfg) {
  const auto in = load_series(cfg);
  const auto segments = load_segments(cfg);
  fs::remove(cfg.work_dir() / "dataset.csv");
  fs::remove(cfg.work_dir() / "split.csv");
  if (!any_anomalous(segments)) {
    spdlog::info("features: no spike events; classifier stages are skipped");
    return;
  }
  const auto data = build_dataset(segments, in.series, cfg.features);
  const auto split = split_train_test(data, cfg.split_ratio, derive_seed(cfg.seed, "split"));
  write_file(cfg.work_dir() / "dataset.csv", data.to_csv());
  write_file(cfg.work_dir() / "split.csv", split_to_csv(split, data.n_rows()));
  spdlog::info("features: {} rows x {} features, {} positive; split {}/{}", data.n_rows(),
               data.n_features(), data.n_positive(), split.train.size(), split.test.size());
}

bool has_events(const PipelineConfig& cfg) { return any_anomalous(load_segments(cfg)); }

FalsePositiveAudit compute_audit(const PipelineConfig& cfg, const Forest& forest) {
  const auto in = load_series(cfg);
  const auto segments = load_segments(cfg);
  const auto data = load_dataset(cfg);
  const auto split = load_split(cfg);
  return false_positive_audit(forest, data.subset(split.test), segments, in.series,
                              load_thresholds(cfg).moderate);
}

void stage_train(const PipelineConfig& cfg) {
  if (!has_events(cfg)) return;
  const auto data = load_dataset(cfg);
  const auto split = load_split(cfg);
  ForestParams params = cfg.forest;
  params.seed = stage_seed(cfg, Stage::Train);
  const auto forest = train(data.subset(split.train), params);
  save(forest, cfg.work_dir() / "model.json");
  const auto metrics = evaluate(forest, data.subset(split.test));
  write_file(cfg.work_dir() / "metrics.txt",
             metrics_to_text(metrics, split.train.size(), split.test.size()));
  const auto audit = compute_audit(cfg, forest);
  write_file(cfg.work_dir() / "audit.csv", audit_to_csv(audit));
  spdlog::info("train: accuracy={:.4f} recall={:.4f} fpr={:.4f}, {} false positives",
               metrics.accuracy, metrics.recall, metrics.false_positive_rate, audit.rows.size());
}

void stage_explain(const PipelineConfig& cfg) {
  if (!has_events(cfg)) return;
  const auto in = load_series(cfg);
  const auto segments = load_segments(cfg);
  const auto data = load_dataset(cfg);
  const auto forest = load_forest(need(cfg, "model.json", Stage::Train));
  std::vector<Explanation> explanations;
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    if (data.label(i) != 1) continue;
    auto e = explain_forest(forest, data.row(i));
    e.segment_id = data.segment_id(i);
    explanations.push_back(std::move(e));
  }
  const auto& names = data.feature_names();
  write_file(cfg.work_dir() / "explanations.csv", explanations_to_csv(explanations, names));
  write_file(cfg.work_dir() / "explanations.json",
             explanations_to_json(explanations, names, cfg.drivers.top_k));
  const auto reports = driver_reports(cfg, explanations, names, segments, in.series);
  write_file(cfg.work_dir() / "driver_reports.csv", reports_to_csv(reports));
  spdlog::info("explain: {} anomalous segments explained", explanations.size());
}

void stage_cluster(const PipelineConfig& cfg) {
  if (!has_events(cfg)) return;
  const auto segments = load_segments(cfg);
  const auto data = cluster_input(cfg, load_dataset(cfg));
  const std::uint64_t seed = stage_seed(cfg, Stage::Cluster);
  std::optional<ElbowResult> curve;
  std::size_t k = cfg.cluster_k;
  if (k == 0) {
    const std::size_t k_max = std::min(cfg.k_max, data.n_rows());
    curve = elbow(data, cfg.k_min, k_max, seed, cfg.kmeans);
    k = curve->suggested_k;
  }
  const auto model = fit_best(data, k, seed, cfg.kmeans);
  write_file(cfg.work_dir() / "clusters.json", cluster_to_json(model, curve).dump(1) + "\n");
  std::string csv = "segment_id,label,start,end,cluster\n";
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    const auto& s = segment_of(segments, data.segment_id(i));
    csv += fmt::format("{},{},{},{},{}\n", data.segment_id(i), s.anomalous() ? "anomalous" : "normal",
                       s.start, s.end, model.assignments[i]);
  }
  write_file(cfg.work_dir() / "segments_clusters.csv", csv);
  spdlog::info("cluster: k={} over {} segments, inertia={}", k, data.n_rows(), model.inertia);
}

std::vector<std::string> stage_report(const PipelineConfig& cfg) {
  const auto in = load_series(cfg);
  const auto segments = load_segments(cfg);
  ReportInputs r;
  r.series = &in.series;
  r.thresholds = load_thresholds(cfg);
  r.events = detect(in.series, r.thresholds, cfg.max_gap);
  r.stats = event_statistics(r.events, in.series, cfg.tz_offset_hours);
  r.n_segments = segments.size();
  r.n_anomalous_segments = static_cast<std::size_t>(
      std::count_if(segments.begin(), segments.end(), [](const Segment& s) { return s.anomalous(); }));
  r.radar_axes = cfg.radar_axes;
  r.effective_config = cfg.effective.to_text();
  if (r.n_anomalous_segments > 0) {
    const auto data = load_dataset(cfg);
    const auto split = load_split(cfg);
    const auto forest = load_forest(need(cfg, "model.json", Stage::Train));
    r.metrics = evaluate(forest, data.subset(split.test));
    r.audit = false_positive_audit(forest, data.subset(split.test), segments, in.series,
                                   r.thresholds.moderate);
    std::vector<std::string> names;
    const auto explanations = explanations_from_csv(
        read_file(need(cfg, "explanations.csv", Stage::Explain)), &names);
    r.drivers = aggregate(driver_reports(cfg, explanations, names, segments, in.series));
    const auto path = need(cfg, "clusters.json", Stage::Cluster);
    auto [model, curve] = cluster_from_json(read_file(path), path);
    r.clusters = std::move(model);
    r.elbow = std::move(curve);
  }
  auto manifest = render_report(cfg.report_dir(), r);
  spdlog::info("report: {} files in {}", manifest.size(), cfg.report_dir().string());
  return manifest;
}

std::vector<std::string> dispatch(const PipelineConfig& cfg, Stage stage) {
  switch (stage) {
    case Stage::Ingest: stage_ingest(cfg); break;
    case Stage::Detect: stage_detect(cfg); break;
    case Stage::Features: stage_features(cfg); break;
    case Stage::Train: stage_train(cfg); break;
    case Stage::Explain: stage_explain(cfg); break;
    case Stage::Cluster: stage_cluster(cfg); break;
    case Stage::Report: return stage_report(cfg);
  }
  return {};
}

std::vector<std::string> run_wrapped(const PipelineConfig& cfg, Stage stage) {
  try {
    return dispatch(cfg, stage);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("stage '{}': {}", to_string(stage), e.detail()));
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::IoFailure, fmt::format("stage '{}': {}", to_string(stage), e.what()));
  }
}

fs::path state_path(const PipelineConfig& cfg) { return cfg.work_dir() / "state.json"; }

std::set<Stage> load_completed(const PipelineConfig& cfg, const std::string& fingerprint) {
  std::set<Stage> done;
  if (!fs::exists(state_path(cfg))) return done;
  try {
    const json j = json::parse(read_file(state_path(cfg)));
    if (j.value("fingerprint", "") != fingerprint) {
      spdlog::info("resume: inputs or config changed; rerunning all stages");
      return done;
    }
    for (const auto& s : j.at("completed")) {
      if (auto st = parse_stage(s.get<std::string>())) done.insert(*st);
    }
  } catch (const json::exception&) {
    spdlog::warn("resume: unreadable state file; rerunning all stages");
    done.clear();
  }
  return done;
}

void save_completed(const PipelineConfig& cfg, const std::string& fingerprint,
                    const std::vector<Stage>& completed) {
  json j;
  j["fingerprint"] = fingerprint;
  j["completed"] = json::array();
  for (Stage s : completed) j["completed"].push_back(std::string(to_string(s)));
  write_file(state_path(cfg), j.dump(1) + "\n");
}

}  // namespace

PipelineConfig make_config(const KeyValueConfig& values, const fs::path& base_dir) {
  KeyValueConfig kv;
  for (const auto& [key, value] : defaults()) kv.set(key, value);
  for (const auto& [key, value] : values.entries()) {
    if (!defaults().count(key)) fail(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
    kv.set(key, value);
  }

  PipelineConfig c;
  c.base_dir = base_dir;
  c.effective = kv;
  const auto csv = kv.get_string("input.csv", "");
  const auto schema = kv.get_string("input.schema", "");
  if (csv.empty()) fail(ErrorCode::InvalidConfig, "input.csv is required");
  if (schema.empty()) fail(ErrorCode::InvalidConfig, "input.schema is required");
  c.input_csv = resolve(base_dir, csv);
  c.input_schema = resolve(base_dir, schema);
  c.output_dir = resolve(base_dir, kv.get_string("output.dir", "out"));

  const auto grid = parse_grid_policy(kv.get_string("input.grid", ""));
  if (!grid) fail(ErrorCode::InvalidConfig, "input.grid must be insert-missing or reject");
  c.grid = *grid;
  const auto fill = parse_fill_policy(kv.get_string("input.fill", ""));
  if (!fill) fail(ErrorCode::InvalidConfig, "input.fill must be forward-fill, linear or fail");
  c.fill = *fill;

  const auto mode = parse_threshold_mode(kv.get_string("threshold.mode", ""));
  if (!mode) fail(ErrorCode::InvalidConfig, "threshold.mode must be percentile or fixed");
  c.thresholds.mode = *mode;
  c.thresholds.moderate = kv.get_double("threshold.moderate", 95.0);
  c.thresholds.high = kv.get_double("threshold.high", 99.0);
  c.max_gap = get_size(kv, "group.max_gap");
  c.b_len = get_size(kv, "segment.b_len");
  c.f_len = get_size(kv, "segment.f_len");
  c.tz_offset_hours = kv.get_double("tz_offset", 0.0);
  c.drivers.tz_offset_hours = c.tz_offset_hours;
  const std::string channels = kv.get_string("features.channels", "");
  for (auto name : split(channels, ',')) {
    name = trim(name);
    if (!name.empty()) c.features.channels.emplace_back(name);
  }

  const long long seed = kv.get_int("seed", 42);
  if (seed < 0) fail(ErrorCode::InvalidConfig, "seed must not be negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.split_ratio = kv.get_double("split.ratio", 0.67);
  if (!(c.split_ratio > 0.0 && c.split_ratio < 1.0)) {
    fail(ErrorCode::InvalidConfig, "split.ratio must lie in (0, 1)");
  }

  c.forest.n_trees = get_size(kv, "forest.n_trees");
  c.forest.max_depth = get_size(kv, "forest.max_depth");
  c.forest.min_samples_leaf = get_size(kv, "forest.min_samples_leaf");
  c.forest.mtry = get_size(kv, "forest.mtry");
  c.forest.class_weighting = kv.get_bool("forest.class_weighting", true);
  c.forest.stratified_bootstrap = kv.get_bool("forest.stratified_bootstrap", true);
  c.forest.decision_threshold = kv.get_double("forest.decision_threshold", 0.5);

  c.drivers.top_k = get_size(kv, "drivers.top_k");
  c.drivers.min_phi = kv.get_double("drivers.min_phi", 0.0);

  c.cluster_k = get_size(kv, "cluster.k");
  c.k_min = get_size(kv, "cluster.k_min");
  c.k_max = get_size(kv, "cluster.k_max");
  if (c.k_min < 1 || c.k_min > c.k_max) {
    fail(ErrorCode::InvalidConfig, "cluster.k_min must be at least 1 and not above cluster.k_max");
  }
  c.kmeans.restarts = get_size(kv, "cluster.restarts");
  c.kmeans.max_iter = get_size(kv, "cluster.max_iter");
  c.kmeans.tol = kv.get_double("cluster.tol", 1e-6);
  if (c.kmeans.restarts < 1) fail(ErrorCode::InvalidConfig, "cluster.restarts must be at least 1");
  c.cluster_anomalous_only = kv.get_bool("cluster.anomalous_only", false);
  c.radar_axes = get_size(kv, "report.radar_axes");
  if (c.radar_axes < 3) fail(ErrorCode::InvalidConfig, "report.radar_axes must be at least 3");
  return c;
}

PipelineConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  auto kv = KeyValueConfig::load(path);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::InvalidConfig, "override '" + o + "' is not key=value");
    }
    kv.set(std::string(trim(std::string_view(o).substr(0, eq))),
           std::string(trim(std::string_view(o).substr(eq + 1))));
  }
  return make_config(kv, path.parent_path());
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Detect: return "detect";
    case Stage::Features: return "features";
    case Stage::Train: return "train";
    case Stage::Explain: return "explain";
    case Stage::Cluster: return "cluster";
    case Stage::Report: return "report";
  }
  return "unknown";
}

std::optional<Stage> parse_stage(std::string_view text) {
  for (Stage s : kAllStages) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::uint64_t stage_seed(const PipelineConfig& config, Stage stage) {
  return derive_seed(config.seed, to_string(stage));
}

void run_stage(const PipelineConfig& config, Stage stage) { run_wrapped(config, stage); }

FalsePositiveAudit run_audit(const PipelineConfig& config) {
  try {
    if (!has_events(config)) return {};
    auto audit = compute_audit(config, load_forest(need(config, "model.json", Stage::Train)));
    write_file(config.work_dir() / "audit.csv", audit_to_csv(audit));
    return audit;
  } catch (const Error& e) {
    throw Error(e.code(), "audit: " + e.detail());
  }
}

std::string input_fingerprint(const PipelineConfig& config) {
  std::uint64_t h = fnv1a(config.effective.to_text());
  for (const auto& p : {config.input_csv, config.input_schema}) {
    if (!fs::exists(p)) fail(ErrorCode::IoFailure, "no such file: " + p.string());
    h = fnv1a(read_file(p), h);
  }
  return fmt::format("{:016x}", h);
}

RunResult run_pipeline(const PipelineConfig& config, bool resume) {
  RunResult result;
  const std::string fp = input_fingerprint(config);
  std::set<Stage> done;
  if (resume) {
    done = load_completed(config, fp);
  } else {
    fs::remove(state_path(config));
  }
  std::vector<Stage> completed;
  bool dirty = false;
  for (Stage stage : kAllStages) {
    if (!dirty && done.count(stage)) {
      result.skipped.push_back(stage);
      completed.push_back(stage);
      continue;
    }
    dirty = true;
    spdlog::debug("stage {} starting", to_string(stage));
    auto manifest = run_wrapped(config, stage);
    if (stage == Stage::Report) result.manifest = std::move(manifest);
    result.executed.push_back(stage);
    completed.push_back(stage);
    save_completed(config, fp, completed);
  }
  if (result.manifest.empty() && fs::exists(config.report_dir())) {
    for (const auto& entry : fs::directory_iterator(config.report_dir())) {
      result.manifest.push_back(entry.path().filename().string());
    }
    std::sort(result.manifest.begin(), result.manifest.end());
  }
  return result;
}

}  // namespace spikelens
