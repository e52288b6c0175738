// spikelens command-line front end.
//
//   spikelens run --config pipeline.conf [--resume] [--set key=value ...]
//   spikelens <stage> --config pipeline.conf
//   spikelens synth --out DIR [--days N --events-per-category N ...]
//
// Exit status: 0 ok, 1 configuration error, 2 data error, 3 pipeline failure.
// SPIKELENS_LOG sets the log level (trace, debug, info, warn, error, off).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "spikelens/error.hpp"
#include "spikelens/pipeline.hpp"
#include "spikelens/synthgen.hpp"

namespace {

using namespace spikelens;

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::Config: return 1;
    case ErrorClass::Data: return 2;
    case ErrorClass::Pipeline: return 3;
  }
  return 3;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("spikelens");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("SPIKELENS_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
}

struct PipelineArgs {
  std::string config;
  std::vector<std::string> overrides;
};

void add_pipeline_args(CLI::App* cmd, PipelineArgs& args) {
  cmd->add_option("-c,--config", args.config, "Pipeline config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--set", args.overrides, "Override a config key (key=value)");
}

void print_audit(const FalsePositiveAudit& audit) {
  std::cout << "false positives: " << audit.rows.size() << "\n"
            << "moderate-spike correlated: " << audit.n_moderate_correlated << "\n"
            << "mean price: " << audit.mean_price << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Price-spike forensics: detect, classify and explain electricity price spikes"};
  app.require_subcommand(1);

  PipelineArgs args;
  bool resume = false;
  auto* run = app.add_subcommand("run", "Run the full pipeline");
  add_pipeline_args(run, args);
  run->add_flag("--resume", resume, "Skip stages already completed with identical inputs");

  std::vector<std::pair<CLI::App*, Stage>> stage_cmds;
  for (Stage s : kAllStages) {
    auto* cmd = app.add_subcommand(std::string(to_string(s)), "Run the " + std::string(to_string(s)) + " stage");
    add_pipeline_args(cmd, args);
    stage_cmds.emplace_back(cmd, s);
  }
  auto* audit = app.add_subcommand("audit", "False-positive audit of the trained model");
  add_pipeline_args(audit, args);

  SynthConfig synth_cfg;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic scenario with ground truth");
  synth->add_option("-o,--out", synth_out, "Output directory")->required();
  synth->add_option("--days", synth_cfg.days, "Scenario length in days")->capture_default_str();
  synth->add_option("--channels-per-category", synth_cfg.channels_per_category)->capture_default_str();
  synth->add_option("--events-per-category", synth_cfg.events_per_category)->capture_default_str();
  synth->add_option("--seed", synth_cfg.seed)->capture_default_str();
  synth->add_option("--signal-strength", synth_cfg.signal_strength,
                    "Driver deviation in baseline standard deviations")->capture_default_str();
  synth->add_flag("--compound", synth_cfg.compound, "Perturb two categories per event");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      const auto scenario = generate(synth_cfg);
      write_scenario(synth_out, scenario);
      spdlog::info("synth: {} events written to {}", scenario.events.size(), synth_out);
      return 0;
    }
    const auto config = load_config(args.config, args.overrides);
    if (run->parsed()) {
      const auto result = run_pipeline(config, resume);
      for (Stage s : result.skipped) spdlog::info("{}: already complete", to_string(s));
      std::cout << config.report_dir().string() << "\n";
      for (const auto& f : result.manifest) std::cout << "  " << f << "\n";
      return 0;
    }
    if (audit->parsed()) {
      print_audit(run_audit(config));
      return 0;
    }
    for (const auto& [cmd, stage] : stage_cmds) {
      if (cmd->parsed()) run_stage(config, stage);
    }
    return 0;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code(e.error_class());
  } catch (const std::exception& e) {
    spdlog::error("Internal: {}", e.what());
    return 3;
  }
}
