// maco: option discovery, training, plotting and table reproduction.
//
//   maco discover --config FILE [--out DIR]
//   maco train --config FILE [--out DIR] [--seeds 1,2,3] [--episodes N]
//   maco plot --out FILE.svg [--labels a,b] AGG.csv...
//   maco reproduce TABLE [--config-dir DIR] [--seeds ...] [--episodes N]
//
// Exit codes: 0 ok, 1 configuration error, 2 runtime error.
// Log verbosity follows SPDLOG_LEVEL (e.g. SPDLOG_LEVEL=debug).

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>

#include "maco/harness.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

int exit_code_for(maco::ErrorKind k) {
  switch (k) {
    case maco::ErrorKind::Config:
    case maco::ErrorKind::UnknownTable:
    case maco::ErrorKind::BadPartition:
    case maco::ErrorKind::ModeMismatch:
      return kConfigError;
    default:
      return kRuntimeError;
  }
}

void apply_overrides(maco::ExperimentConfig& cfg, const std::string& out, const std::vector<std::uint64_t>& seeds,
                     int episodes) {
  if (!out.empty()) cfg.out_dir = out;
  if (!seeds.empty()) cfg.seeds = seeds;
  if (episodes >= 0) cfg.learner_cfg.episodes = episodes;
  cfg.validate();
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  spdlog::cfg::load_env_levels();

  CLI::App app{"Multi-agent covering options: discovery, training and reporting"};
  app.require_subcommand(1);

  std::string config, out, table;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inputs, labels;
  int episodes = -1;
  unsigned threads = 0;

  auto* discover = app.add_subcommand("discover", "Discover options and write an option manifest");
  discover->add_option("--config", config, "Experiment config (INI)")->required();
  discover->add_option("--out", out, "Output directory");

  auto* train = app.add_subcommand("train", "Train every configured seed and write CSVs");
  train->add_option("--config", config, "Experiment config (INI)")->required();
  train->add_option("--out", out, "Output directory");
  train->add_option("--seeds", seeds, "Seed list")->delimiter(',');
  train->add_option("--episodes", episodes, "Episodes per seed");
  train->add_option("--threads", threads, "Parallel seeds (0 = all cores)");

  auto* plot = app.add_subcommand("plot", "Render aggregate CSVs as an SVG learning curve");
  plot->add_option("--out", out, "SVG file")->required();
  plot->add_option("--labels", labels, "Series labels")->delimiter(',');
  plot->add_option("inputs", inputs, "Aggregate CSV files (episode,mean,std)")->required();

  auto* reproduce = app.add_subcommand("reproduce", "Run a shipped Multiple/Single/No-options table");
  reproduce->add_option("table", table, "Table id")->required();
  reproduce->add_option("--config-dir", config, "Directory holding the table configs");
  reproduce->add_option("--seeds", seeds, "Seed list")->delimiter(',');
  reproduce->add_option("--episodes", episodes, "Episodes per seed");
  reproduce->add_option("--threads", threads, "Parallel seeds (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*discover) {
      auto cfg = maco::ExperimentConfig::load(config);
      apply_overrides(cfg, out, {}, -1);
      const auto res = maco::discover_experiment(cfg, std::cout);
      std::cout << "manifest: " << res.manifest.string() << '\n';
    } else if (*train) {
      auto cfg = maco::ExperimentConfig::load(config);
      apply_overrides(cfg, out, seeds, episodes);
      const auto res = maco::train_experiment(cfg, threads);
      std::cout << "value " << maco::format_double(res.aggregate.value) << " steps "
                << maco::format_double(res.aggregate.steps) << '\n';
      for (const auto& f : res.files) std::cout << "wrote " << f.string() << '\n';
    } else if (*plot) {
      if (!labels.empty() && labels.size() != inputs.size()) {
        throw maco::Error(maco::ErrorKind::Config, "--labels needs one label per input");
      }
      std::vector<maco::Series> series;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        std::ifstream in(inputs[i]);
        if (!in) throw maco::Error(maco::ErrorKind::Io, "cannot open " + inputs[i]);
        const auto label = labels.empty() ? std::filesystem::path(inputs[i]).stem().string() : labels[i];
        series.push_back(maco::read_aggregate_csv(in, label));
      }
      std::ofstream f(out, std::ios::binary);
      if (!f) throw maco::Error(maco::ErrorKind::Io, "cannot write " + out);
      maco::write_svg(f, series);
      std::cout << "wrote " << out << '\n';
    } else if (*reproduce) {
      const auto dir = config.empty() ? maco::default_config_dir() : std::filesystem::path(config);
      std::optional<std::vector<std::uint64_t>> s;
      if (!seeds.empty()) s = seeds;
      std::optional<int> e;
      if (episodes >= 0) e = episodes;
      maco::print_table(std::cout, maco::reproduce_table(table, dir, s, e, threads));
    }
  } catch (const maco::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
