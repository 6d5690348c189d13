#ifndef MACO_OPTION_MODEL_HPP
#define MACO_OPTION_MODEL_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "maco/kron_spectrum.hpp"
#include "maco/policy_vi.hpp"
#include "maco/spectral_graph.hpp"

namespace maco {

/// States visited so far by one agent group: per-member individual states plus
/// joint group states. Joint states are stored exactly while the joint space
/// fits under `exact_cap`; beyond that a joint state counts as known when each
/// member's component is known.
class KnownSet {
 public:
  explicit KnownSet(std::vector<int> dims, std::uint64_t exact_cap = 1'000'000);

  void visit(std::span<const int> group_state);
  /// Mark every combination of the given per-member states as known.
  void seed_product(const std::vector<std::vector<int>>& per_member);

  bool known_individual(int member, int s) const;
  bool known_joint(std::span<const int> group_state) const;
  std::size_t n_known_individual(int member) const;
  bool exact() const noexcept { return exact_; }
  const std::vector<int>& dims() const noexcept { return dims_; }

 private:
  std::vector<int> dims_;
  bool exact_;
  std::vector<std::vector<char>> individual_;
  std::vector<std::vector<char>> seeded_;
  bool any_seeded_ = false;
  std::unordered_set<std::uint64_t> joint_;
};

/// Option whose termination state is a joint state of an agent group. Member
/// k follows intra_policies[k] toward target[k].
struct MultiAgentOption {
  std::vector<int> agents;
  std::vector<int> target;
  std::vector<DeterministicPolicy> intra_policies;

  /// Terminates at the target or when the group leaves the known region.
  bool terminates(std::span<const int> group_state, const KnownSet& known) const;
};

/// One direction of a point-to-point option pair between origin and target.
struct SingleAgentOption {
  int agent = 0;
  int origin = 0;
  int target = 0;
  DeterministicPolicy intra_policy;

  bool terminates(int s, const KnownSet& known, int member) const;
};

struct DiscoveryConfig {
  std::size_t tot_num = 4;
  KronOptions kron;
  double extremum_tol = 1e-9;
  /// 0 keeps every tied joint state; otherwise at most this many per extremum
  /// set, preferring those farthest from `reference` (then lowest index).
  std::size_t max_targets_per_extremum = 0;
  std::vector<int> reference;
  std::size_t max_iterations = 64;
};

struct DiscoveryIteration {
  std::vector<JointEigenCandidate> candidates;
  std::vector<Extrema> extrema;  // per candidate, after capping
  std::vector<std::vector<int>> new_targets;
};

struct DiscoveryResult {
  std::vector<MultiAgentOption> options;
  std::vector<DiscoveryIteration> iterations;
  std::vector<FactorGraph> graphs;  // factor graphs after all updates
};

/// Multi-agent covering options: iterate Kronecker Fiedler estimates, take the
/// joint states at the extremes of each candidate vector as option targets and
/// connect MIN to MAX in the factor graphs, until tot_num options exist.
/// `models` give the real per-agent dynamics used for the intra-option policies.
DiscoveryResult discover_multiagent_options(std::vector<FactorGraph> graphs, std::span<const TransitionModel> models,
                                            const DiscoveryConfig& cfg, std::vector<int> agent_ids = {});

/// One option per joint state in `targets`.
std::vector<MultiAgentOption> generate_options(std::span<const std::vector<int>> targets,
                                               std::span<const TransitionModel> models, std::span<const int> agent_ids);

/// Add an edge between the per-agent components of every (min, max) pair;
/// components that coincide are skipped. Returns the number of edges added.
std::size_t update_adjacency(std::vector<FactorGraph>& graphs, std::span<const std::vector<int>> mins,
                             std::span<const std::vector<int>> maxs);

/// Single-agent covering options on one factor graph: repeatedly connect the
/// Fiedler extremes, emitting the option pair (i -> j, j -> i) each time.
std::vector<SingleAgentOption> discover_single_agent_options(FactorGraph g, const TransitionModel& model,
                                                             std::size_t num, int agent = 0);

/// Manifest CSV: option,kind,agents,origin,target,actions. Agents and targets
/// are space-separated; origin is empty for multi-agent options; `actions`
/// holds one space-separated policy table per member, separated by '|'.
void write_option_manifest(std::ostream& out, std::span<const MultiAgentOption> multi,
                           std::span<const SingleAgentOption> single);

struct OptionManifest {
  std::vector<MultiAgentOption> multi;
  std::vector<SingleAgentOption> single;
};
OptionManifest read_option_manifest(std::istream& in);

}  // namespace maco

#endif  // MACO_OPTION_MODEL_HPP
