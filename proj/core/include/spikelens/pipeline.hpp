#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spikelens/audit.hpp"
#include "spikelens/clusterer.hpp"
#include "spikelens/config.hpp"
#include "spikelens/driver_attrib.hpp"
#include "spikelens/forest.hpp"
#include "spikelens/market_data.hpp"
#include "spikelens/spike_detector.hpp"
#include "spikelens/state_space.hpp"

namespace spikelens {

/// Every tunable of the pipeline. Keys and defaults:
///
///     input.csv, input.schema      paths, relative to the config file
///     input.grid = insert-missing  input.fill = forward-fill
///     output.dir = out             (work/ and report/ are created inside)
///     threshold.mode = percentile  threshold.moderate = 95  threshold.high = 99
///     group.max_gap = 0            segment.b_len = 6  segment.f_len = 6
///     tz_offset = 0                features.channels = (all, comma-separated)
///     seed = 42                    split.ratio = 0.67
///     forest.n_trees = 200  forest.max_depth = 12  forest.min_samples_leaf = 2
///     forest.mtry = 0  forest.class_weighting = true
///     forest.stratified_bootstrap = true  forest.decision_threshold = 0.5
///     drivers.top_k = 5  drivers.min_phi = 0
///     cluster.k = 0 (elbow)  cluster.k_min = 2  cluster.k_max = 15
///     cluster.restarts = 10  cluster.max_iter = 300  cluster.tol = 1e-6
///     cluster.anomalous_only = false
///     report.radar_axes = 8
struct PipelineConfig {
  std::filesystem::path base_dir;
  std::filesystem::path input_csv;
  std::filesystem::path input_schema;
  std::filesystem::path output_dir;
  GridPolicy grid = GridPolicy::InsertMissing;
  FillPolicy fill = FillPolicy::ForwardFill;
  ThresholdSpec thresholds;
  std::size_t max_gap = 0;
  std::size_t b_len = 6;
  std::size_t f_len = 6;
  double tz_offset_hours = 0.0;
  ChannelFilter features;
  std::uint64_t seed = 42;
  double split_ratio = 0.67;
  ForestParams forest;
  AttributionOptions drivers;
  std::size_t cluster_k = 0;
  std::size_t k_min = 2;
  std::size_t k_max = 15;
  KMeansOptions kmeans;
  bool cluster_anomalous_only = false;
  std::size_t radar_axes = 8;
  // Every key with its effective value, defaults included.
  KeyValueConfig effective;

  std::filesystem::path work_dir() const { return output_dir / "work"; }
  std::filesystem::path report_dir() const { return output_dir / "report"; }
};

// Unknown keys and malformed values raise InvalidConfig. Relative paths are
// resolved against base_dir.
PipelineConfig make_config(const KeyValueConfig& values, const std::filesystem::path& base_dir);

// Loads a config file and applies `key=value` overrides on top.
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});

enum class Stage { Ingest, Detect, Features, Train, Explain, Cluster, Report };

inline constexpr std::array<Stage, 7> kAllStages = {Stage::Ingest,  Stage::Detect,  Stage::Features,
                                                    Stage::Train,   Stage::Explain, Stage::Cluster,
                                                    Stage::Report};

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view text);

// Per-stage seed derived from the global seed.
std::uint64_t stage_seed(const PipelineConfig& config, Stage stage);

/// Runs one stage, reading the previous stages' files from work/ and writing
/// its own. Errors carry the stage name; a missing prerequisite is
/// StageNotReady. Stages after Features are no-ops when detection found no
/// events.
void run_stage(const PipelineConfig& config, Stage stage);

// Recomputes the false-positive audit from the trained model and writes
// work/audit.csv. Returns an empty audit when detection found no events.
FalsePositiveAudit run_audit(const PipelineConfig& config);

struct RunResult {
  std::vector<Stage> executed;
  std::vector<Stage> skipped;  // already complete on resume
  std::vector<std::string> manifest;
};

/// Full pipeline. With `resume`, stages recorded complete in work/state.json
/// are skipped as long as the effective config and input bytes are unchanged.
RunResult run_pipeline(const PipelineConfig& config, bool resume = false);

// Fingerprint of the effective config and input files, stored in the state file.
std::string input_fingerprint(const PipelineConfig& config);

}  // namespace spikelens
