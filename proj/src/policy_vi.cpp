#include "maco/policy_vi.hpp"

#include <cmath>

namespace maco {

TransitionModel TransitionModel::from_graph(const FactorGraph& g) {
  const int n = g.n_nodes();
  int max_deg = 0;
  for (int i = 0; i < n; ++i) max_deg = std::max(max_deg, g.degree(i));
  TransitionModel m;
  m.next = Eigen::MatrixXi::Constant(n, max_deg, -1);
  for (int i = 0; i < n; ++i) {
    const auto nb = g.neighbors(i);
    for (std::size_t k = 0; k < nb.size(); ++k) m.next(i, static_cast<Eigen::Index>(k)) = nb[k];
  }
  return m;
}

DeterministicPolicy::DeterministicPolicy(std::vector<int> actions, int goal) : actions_(std::move(actions)), goal_(goal) {
  if (goal_ < 0 || goal_ >= static_cast<int>(actions_.size())) throw Error(ErrorKind::IndexOutOfRange, "policy goal outside state space");
}

bool DeterministicPolicy::reaches_goal_from(int s) const {
  if (s < 0 || s >= static_cast<int>(actions_.size())) throw Error(ErrorKind::IndexOutOfRange, "state outside policy table");
  return actions_[static_cast<std::size_t>(s)] != kUnreachableAction;
}

int DeterministicPolicy::action(int s) const {
  if (!reaches_goal_from(s)) {
    throw Error(ErrorKind::UnreachableTarget, "state " + std::to_string(s) + " has no path to " + std::to_string(goal_));
  }
  return actions_[static_cast<std::size_t>(s)];
}

DeterministicPolicy value_iteration_policy(const TransitionModel& model, int goal, const ViOptions& opts) {
  const int n = model.n_states();
  const int na = model.n_actions();
  if (goal < 0 || goal >= n) throw Error(ErrorKind::IndexOutOfRange, "goal outside state space");

  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  auto q_value = [&](int s, int a) {
    const int nx = model.next(s, a);
    if (nx < 0) return -1.0;
    return nx == goal ? 1.0 : opts.gamma * v(nx);
  };

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    Eigen::VectorXd nv = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < n; ++s) {
      if (s == goal) continue;
      double best = 0.0;
      for (int a = 0; a < na; ++a) best = std::max(best, q_value(s, a));
      nv(s) = best;
    }
    const double delta = (nv - v).cwiseAbs().maxCoeff();
    v = std::move(nv);
    if (delta < opts.tol) break;
  }
  if (it == opts.max_iterations) throw Error(ErrorKind::NoConvergence, "value iteration did not converge");

  std::vector<int> actions(static_cast<std::size_t>(n), kUnreachableAction);
  bool any = n == 1;
  for (int s = 0; s < n; ++s) {
    if (s == goal) {
      actions[static_cast<std::size_t>(s)] = kTerminateAction;
      continue;
    }
    if (v(s) <= 0.0) continue;
    any = true;
    int best_a = -1;
    double best = -1.0;
    for (int a = 0; a < na; ++a) {
      const double q = q_value(s, a);
      if (q > best * (1.0 + 1e-12)) {
        best = q;
        best_a = a;
      }
    }
    actions[static_cast<std::size_t>(s)] = best_a;
  }
  if (!any) throw Error(ErrorKind::UnreachableTarget, "no state reaches goal " + std::to_string(goal));
  return DeterministicPolicy(std::move(actions), goal);
}

int rollout_length(const DeterministicPolicy& policy, const TransitionModel& model, int start) {
  int s = start;
  for (int steps = 0; steps <= model.n_states(); ++steps) {
    const int a = policy.action(s);
    if (a == kTerminateAction) return steps;
    s = model.next(s, a);
  }
  throw Error(ErrorKind::UnreachableTarget, "policy loops without reaching its goal");
}

}  // namespace maco
