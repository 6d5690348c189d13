#ifndef MACO_LEARNERS_HPP
#define MACO_LEARNERS_HPP

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "maco/envs.hpp"
#include "maco/option_model.hpp"

namespace maco {

enum class LearnerKind { Random, Iql, DistQ, CentQ, CentQForce };
enum class OptionSource { None, Single, Multi };
enum class KnownBootstrap { Reachable, Start };

LearnerKind parse_learner(const std::string& s);
OptionSource parse_option_source(const std::string& s);
KnownBootstrap parse_known_bootstrap(const std::string& s);
std::string to_string(LearnerKind k);
std::string to_string(OptionSource s);

/// Size of the choice set seen by one deciding unit.
struct ActionSpaceSpec {
  int n_agents = 1;
  int k = 0;  // option handles
  bool centralized_force = false;

  /// (4 + k)^n for decentralized use, 4^n + k when the group is forced to
  /// share one option. Throws Overflow.
  std::uint64_t joint_choices() const;
};

/// Lowest-index argmax over entries with mask != 0; -1 when nothing is allowed.
int greedy_choice(std::span<const double> q, std::span<const char> mask);

/// Sparse tabular Q-function; unseen rows read as zeros.
class QTable {
 public:
  explicit QTable(int n_choices = 0) : n_choices_(n_choices) {}

  int n_choices() const noexcept { return n_choices_; }
  std::size_t n_rows() const noexcept { return rows_.size(); }
  std::span<const double> row(std::uint64_t key) const;
  double get(std::uint64_t key, int choice) const { return row(key)[static_cast<std::size_t>(choice)]; }
  void set(std::uint64_t key, int choice, double value);
  const std::unordered_map<std::uint64_t, std::vector<double>>& rows() const noexcept { return rows_; }

 private:
  int n_choices_;
  std::unordered_map<std::uint64_t, std::vector<double>> rows_;
  mutable std::vector<double> zeros_;
};

struct LearnerConfig {
  double alpha = 0.1;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_decay_fraction = 0.5;  // of cfg.episodes
  double gamma = 0.99;
  int episodes = 1000;
  std::uint64_t seed = 0;
  KnownBootstrap known = KnownBootstrap::Reachable;

  void validate() const;
  double epsilon(int episode) const;
};

/// Options available to one agent group. `single` is indexed by member.
struct GroupOptions {
  std::vector<MultiAgentOption> multi;
  std::vector<std::vector<SingleAgentOption>> single;

  bool empty() const;
};

/// One entry per task group.
using OptionSet = std::vector<GroupOptions>;

/// Discover options for every group of the task: multi-agent options over
/// each group's joint space, or tot_num single-agent options per agent.
OptionSet build_options(const GridTask& task, OptionSource source, const DiscoveryConfig& cfg);

/// Turn per-member single options into shared group options: the k-th shared
/// option sends every member along its own k-th single option.
OptionSet share_single_options(const OptionSet& options);

std::vector<KnownSet> make_known_sets(const GridTask& task, KnownBootstrap bootstrap);

struct EpisodeRecord {
  double cumulative_reward = 0.0;
  int steps = 0;
};

struct LearningRun {
  LearnerKind learner = LearnerKind::Random;
  OptionSource source = OptionSource::None;
  std::uint64_t seed = 0;
  std::vector<EpisodeRecord> episodes;
};

/// Hierarchical tabular learner. One decider per agent (random, iql, distq)
/// or per group (centq, centq_force); each picks a primitive move or an option
/// and is updated with the SMDP rule when its choice terminates.
class Learner {
 public:
  Learner(const GridTask& task, LearnerKind kind, OptionSet options, const LearnerConfig& cfg);

  EpisodeRecord run_episode(std::vector<KnownSet>& known, double epsilon, bool learn = true);

  std::size_t n_deciders() const noexcept { return deciders_.size(); }
  const QTable& q_table(std::size_t decider) const { return deciders_.at(decider).q; }
  QTable& q_table(std::size_t decider) { return deciders_.at(decider).q; }
  ActionSpaceSpec action_space(std::size_t decider) const;
  /// Joint states visited in the last episode, one per step including the start.
  const std::vector<JointState>& last_trajectory() const noexcept { return trajectory_; }

 private:
  struct Decider {
    int group = 0;
    std::vector<int> members;  // positions within the group
    std::vector<int> radix;    // per-member choice counts (centq)
    int n_choices = 0;
    bool joint_obs = false;
    QTable q;
    // live choice
    bool active = false;
    int choice = 0;
    std::uint64_t obs = 0;
    double r_cum = 0.0;
    int tau = 0;
  };
  struct Component {
    int primitive = -1;
    const DeterministicPolicy* policy = nullptr;
    int target = -1;
    bool multi = false;
  };

  std::vector<int> group_state(int group, std::span<const int> state) const;
  std::uint64_t observe(const Decider& d, std::span<const int> state) const;
  void choice_mask(const Decider& d, std::span<const int> state, const std::vector<KnownSet>& known,
                   std::vector<char>& mask) const;
  bool member_option_available(int group, int member, int option, std::span<const int> gs, const KnownSet& known) const;
  std::vector<Component> decode(const Decider& d, int choice) const;
  int member_action(const Component& c, int cell) const;
  bool finished(const Decider& d, std::span<const int> state, const KnownSet& known) const;
  int pick(const Decider& d, std::span<const int> state, const std::vector<KnownSet>& known, double epsilon);

  const GridTask& task_;
  LearnerKind kind_;
  OptionSet options_;
  LearnerConfig cfg_;
  std::mt19937_64 rng_;
  std::vector<Decider> deciders_;
  std::vector<int> member_of_;  // agent -> position within its group
  std::vector<int> group_of_;
  std::vector<std::vector<int>> group_dims_;
  std::vector<JointState> trajectory_;
};

/// Train for cfg.episodes episodes. The options are used as given, except
/// that centq_force receives shared versions of single options.
LearningRun train(const GridTask& task, LearnerKind kind, OptionSource source, const OptionSet& options,
                  const LearnerConfig& cfg);

}  // namespace maco

#endif  // MACO_LEARNERS_HPP
