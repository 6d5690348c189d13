#ifndef MACO_HARNESS_HPP
#define MACO_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maco/envs.hpp"
#include "maco/learners.hpp"
#include "maco/option_model.hpp"

namespace maco {

/// Everything one `train` or `discover` invocation needs. Loaded from an INI
/// file; relative paths resolve against the file's directory.
struct ExperimentConfig {
  std::string name;
  std::filesystem::path map_path;
  std::vector<std::filesystem::path> factor_graphs;  // abstract discovery only
  TaskSpec task;
  GroupingMode grouping = GroupingMode::Subtask;
  int group_size = 0;
  std::uint64_t grouping_seed = 0;
  LearnerKind learner = LearnerKind::CentQForce;
  OptionSource source = OptionSource::Multi;
  DiscoveryConfig discovery;
  LearnerConfig learner_cfg;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::filesystem::path out_dir = "results";
  std::string label;

  static ExperimentConfig load(const std::filesystem::path& path);
  static ExperimentConfig parse(std::istream& in, const std::filesystem::path& base_dir, const std::string& name);
  /// Cross-checks settings against the task and learner preconditions.
  void validate() const;
};

GridTask build_task(const ExperimentConfig& cfg);

/// Per-episode statistics across seeds. `std` is the population standard
/// deviation (divides by the number of seeds).
struct AggregateResult {
  std::vector<double> mean;
  std::vector<double> std;
  double value = 0.0;  // mean cumulative reward over all episodes and seeds
  double steps = 0.0;
  std::size_t n_seeds = 0;
};

AggregateResult aggregate(std::span<const LearningRun> runs);

/// Shortest round-trip decimal form.
std::string format_double(double x);

void write_runs_csv(std::ostream& out, std::span<const LearningRun> runs);
std::vector<LearningRun> read_runs_csv(std::istream& in);
void write_aggregate_csv(std::ostream& out, const AggregateResult& agg);

struct Series {
  std::string label;
  std::vector<double> mean;
  std::vector<double> std;
};
Series read_aggregate_csv(std::istream& in, const std::string& label);
/// Mean line and ±1 std band per series; the band polygon has 2×episodes vertices.
void write_svg(std::ostream& out, std::span<const Series> series, const std::string& title = "");

/// Runs every configured seed (in parallel, each with isolated state) and
/// returns the runs in seed order.
std::vector<LearningRun> run_seeds(const GridTask& task, const ExperimentConfig& cfg, const OptionSet& options,
                                   unsigned threads = 0);

struct TrainOutputs {
  std::vector<LearningRun> runs;
  AggregateResult aggregate;
  std::vector<std::filesystem::path> files;
};
/// Discover options, train every seed, write per-seed, aggregate and summary CSVs.
TrainOutputs train_experiment(const ExperimentConfig& cfg, unsigned threads = 0);

struct DiscoverOutputs {
  std::vector<DiscoveryResult> multi;  // one per group, or one for abstract graphs
  std::vector<SingleAgentOption> single;
  std::filesystem::path manifest;
};
DiscoverOutputs discover_experiment(const ExperimentConfig& cfg, std::ostream& log);

struct TableRow {
  std::string label;
  double value = 0.0;
  double steps = 0.0;
};
struct ReproducedTable {
  std::string id;
  std::vector<TableRow> rows;
};

std::vector<std::string> table_ids();
std::filesystem::path default_config_dir();
/// Runs the Multiple / Single / No-options bundle behind a shipped table.
/// Throws UnknownTable.
ReproducedTable reproduce_table(const std::string& id, const std::filesystem::path& config_dir,
                                std::optional<std::vector<std::uint64_t>> seeds = std::nullopt,
                                std::optional<int> episodes = std::nullopt, unsigned threads = 0);
void print_table(std::ostream& out, const ReproducedTable& t);

}  // namespace maco

#endif  // MACO_HARNESS_HPP
