#ifndef MACO_POLICY_VI_HPP
#define MACO_POLICY_VI_HPP

#include <Eigen/Dense>

#include <vector>

#include "maco/spectral_graph.hpp"

namespace maco {

/// Deterministic single-agent dynamics: next(s, a) is the successor state, or
/// -1 when action a does not exist in state s.
struct TransitionModel {
  Eigen::MatrixXi next;

  int n_states() const noexcept { return static_cast<int>(next.rows()); }
  int n_actions() const noexcept { return static_cast<int>(next.cols()); }

  /// Action k in state s moves to the k-th neighbour of s (ascending order).
  static TransitionModel from_graph(const FactorGraph& g);
};

inline constexpr int kTerminateAction = -1;
inline constexpr int kUnreachableAction = -2;

/// Greedy shortest-path policy toward one goal state.
class DeterministicPolicy {
 public:
  DeterministicPolicy() = default;
  DeterministicPolicy(std::vector<int> actions, int goal);

  int goal() const noexcept { return goal_; }
  const std::vector<int>& table() const noexcept { return actions_; }
  bool reaches_goal_from(int s) const;

  /// Action to take in s; kTerminateAction at the goal.
  /// Throws UnreachableTarget when s has no path to the goal.
  int action(int s) const;

  friend bool operator==(const DeterministicPolicy&, const DeterministicPolicy&) = default;

 private:
  std::vector<int> actions_;
  int goal_ = -1;
};

struct ViOptions {
  double gamma = 0.99;
  double tol = 1e-6;
  int max_iterations = 100000;
};

/// Value iteration with reward 1 on entering the (absorbing) goal and 0
/// otherwise; the greedy policy takes the lowest action index among maximal
/// Q-values, so with deterministic dynamics it follows a shortest path.
DeterministicPolicy value_iteration_policy(const TransitionModel& model, int goal, const ViOptions& opts = {});

/// Number of steps the policy needs from `start` to its goal.
int rollout_length(const DeterministicPolicy& policy, const TransitionModel& model, int start);

}  // namespace maco

#endif  // MACO_POLICY_VI_HPP
