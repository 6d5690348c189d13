#include "doctest.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "maco/learners.hpp"

using namespace maco;

namespace {

GridTask corridor_task(const std::string& row, int n_agents = 1, int cap = 200) {
  const std::string wall(row.size(), '#');
  std::istringstream in(wall + "\n" + row + "\n" + wall + "\n");
  TaskSpec spec;
  spec.n_agents = n_agents;
  spec.episode_cap = cap;
  return make_task(GridMap::parse(in), spec);
}

GridTask fourroom_2agent() {
  const auto map = GridMap::load((std::filesystem::path(MACO_SOURCE_DIR) / "maps" / "fourroom_2agent.txt").string());
  TaskSpec spec;
  spec.n_agents = 2;
  auto t = make_task(map, spec);
  t.groups = make_groups(t, GroupingMode::Subtask);
  return t;
}

LearnerConfig quiet(double eps, int episodes = 1, double alpha = 1.0) {
  LearnerConfig c;
  c.alpha = alpha;
  c.eps_start = c.eps_end = eps;
  c.episodes = episodes;
  c.seed = 5;
  return c;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("parsers and names") {
  CHECK(parse_learner("centq_force") == LearnerKind::CentQForce);
  CHECK(to_string(LearnerKind::DistQ) == "distq");
  CHECK(parse_option_source("single") == OptionSource::Single);
  CHECK(to_string(OptionSource::Multi) == "multi");
  CHECK(parse_known_bootstrap("start") == KnownBootstrap::Start);
  CHECK(kind_of([] { parse_learner("vdn"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_option_source("some"); }) == ErrorKind::Config);
}

TEST_CASE("epsilon schedule and validation") {
  LearnerConfig c;
  c.episodes = 100;
  CHECK(c.epsilon(0) == 1.0);
  CHECK(c.epsilon(25) == doctest::Approx(0.525));
  CHECK(c.epsilon(50) == 0.05);
  CHECK(c.epsilon(99) == 0.05);
  c.alpha = 0.0;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Config);
  c = LearnerConfig{};
  c.gamma = 1.5;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Config);
}

TEST_CASE("choice counts") {
  CHECK(ActionSpaceSpec{2, 3, false}.joint_choices() == 49);
  CHECK(ActionSpaceSpec{2, 3, true}.joint_choices() == 19);
  CHECK(ActionSpaceSpec{8, 0, true}.joint_choices() == 65536);
  CHECK(kind_of([] { ActionSpaceSpec{64, 4, false}.joint_choices(); }) == ErrorKind::Overflow);

  const auto task = fourroom_2agent();
  DiscoveryConfig dc;
  dc.max_targets_per_extremum = 1;
  const auto opts = build_options(task, OptionSource::Multi, dc);
  REQUIRE(opts.size() == 1);
  const int k = static_cast<int>(opts[0].multi.size());
  CHECK(k >= 4);

  const auto cfg = quiet(0.1);
  Learner force(task, LearnerKind::CentQForce, opts, cfg);
  CHECK(force.n_deciders() == 1);
  CHECK(force.q_table(0).n_choices() == 16 + k);
  Learner cent(task, LearnerKind::CentQ, opts, cfg);
  CHECK(cent.q_table(0).n_choices() == (4 + k) * (4 + k));
  CHECK(cent.action_space(0).joint_choices() == static_cast<std::uint64_t>((4 + k) * (4 + k)));
  Learner iql(task, LearnerKind::Iql, opts, cfg);
  CHECK(iql.n_deciders() == 2);
  CHECK(iql.q_table(1).n_choices() == 4 + k);
}

TEST_CASE("greedy choice respects the mask and is invariant to positive scaling") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  std::bernoulli_distribution coin(0.6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> q(7), scaled(7);
    std::vector<char> mask(7);
    for (std::size_t i = 0; i < 7; ++i) {
      q[i] = std::round(nd(rng) * 2) / 2;
      scaled[i] = 3.5 * q[i] + 11.0;
      mask[i] = coin(rng);
    }
    const int c = greedy_choice(q, mask);
    CHECK(c == greedy_choice(scaled, mask));
    if (c >= 0) {
      CHECK(mask[static_cast<std::size_t>(c)]);
      for (std::size_t i = 0; i < 7; ++i) {
        if (!mask[i]) continue;
        CHECK(q[i] <= q[static_cast<std::size_t>(c)]);
        if (static_cast<int>(i) < c) CHECK(q[i] < q[static_cast<std::size_t>(c)]);
      }
    } else {
      CHECK(std::count(mask.begin(), mask.end(), char{1}) == 0);
    }
  }
}

TEST_CASE("q table") {
  QTable q(3);
  CHECK(q.get(42, 2) == 0.0);
  CHECK(q.n_rows() == 0);
  q.set(42, 1, 0.5);
  CHECK(q.get(42, 1) == 0.5);
  CHECK(q.n_rows() == 1);
  CHECK_THROWS_AS(q.set(42, 3, 0.0), Error);
  CHECK_THROWS_AS(q.set(42, 0, std::nan("")), Error);
}

TEST_CASE("two-state chain converges to the analytic Q-values") {
  // Moving right enters the goal (reward 1); every other move stays put.
  const auto task = corridor_task("#a0#");
  const auto cfg = quiet(1.0, 300);
  Learner l(task, LearnerKind::Iql, {}, cfg);
  auto known = make_known_sets(task, KnownBootstrap::Reachable);
  for (int e = 0; e < cfg.episodes; ++e) l.run_episode(known, 1.0);
  const auto& q = l.q_table(0);
  CHECK(q.get(0, kRight) == doctest::Approx(1.0).epsilon(1e-12));
  for (int a : {kUp, kDown, kLeft}) CHECK(q.get(0, a) == doctest::Approx(cfg.gamma).epsilon(1e-12));
}

TEST_CASE("distq only raises its estimates") {
  const auto task = corridor_task("#a..0#");
  auto cfg = quiet(1.0, 1);
  Learner l(task, LearnerKind::DistQ, {}, cfg);
  auto known = make_known_sets(task, KnownBootstrap::Reachable);
  std::map<std::pair<std::uint64_t, int>, double> last;
  for (int e = 0; e < 50; ++e) {
    l.run_episode(known, 1.0);
    for (const auto& [key, row] : l.q_table(0).rows())
      for (int c = 0; c < 4; ++c) {
        auto& prev = last[{key, c}];
        CHECK(row[static_cast<std::size_t>(c)] >= prev);
        prev = row[static_cast<std::size_t>(c)];
      }
  }
}

TEST_CASE("an option is one SMDP decision") {
  const auto task = corridor_task("#a...0#");
  const auto model = transition_model(task.map);
  MultiAgentOption to_goal{{0}, {4}, {value_iteration_policy(model, 4)}};
  OptionSet opts(1);
  opts[0].multi = {to_goal};
  Learner l(task, LearnerKind::Iql, opts, quiet(0.0));
  l.q_table(0).set(0, kNumMoves, 0.5);
  auto known = make_known_sets(task, KnownBootstrap::Reachable);
  const auto rec = l.run_episode(known, 0.0);
  CHECK(rec.steps == 4);
  CHECK(rec.cumulative_reward == doctest::Approx(std::pow(0.99, 3)));
  CHECK(l.q_table(0).get(0, kNumMoves) == doctest::Approx(std::pow(0.99, 3)).epsilon(1e-12));
  // The intermediate cells never made a decision.
  CHECK(l.q_table(0).n_rows() == 1);
  const std::vector<JointState> path{{0}, {1}, {2}, {3}, {4}};
  CHECK(l.last_trajectory() == path);
}

TEST_CASE("an option chosen at its own target waits one step") {
  const auto task = corridor_task("#a...0#", 1, 3);
  const auto model = transition_model(task.map);
  MultiAgentOption here{{0}, {0}, {value_iteration_policy(model, 0)}};
  OptionSet opts(1);
  opts[0].multi = {here};
  Learner l(task, LearnerKind::Iql, opts, quiet(0.0));
  l.q_table(0).set(0, kNumMoves, 1.0);
  auto known = make_known_sets(task, KnownBootstrap::Reachable);
  l.run_episode(known, 0.0, false);
  CHECK(l.last_trajectory() == std::vector<JointState>{{0}, {0}, {0}, {0}});
}

TEST_CASE("random learner never writes Q-values") {
  const auto task = fourroom_2agent();
  const auto opts = build_options(task, OptionSource::Single, DiscoveryConfig{});
  Learner l(task, LearnerKind::Random, opts, quiet(1.0));
  auto known = make_known_sets(task, KnownBootstrap::Reachable);
  for (int e = 0; e < 5; ++e) l.run_episode(known, 1.0);
  for (std::size_t d = 0; d < l.n_deciders(); ++d) CHECK(l.q_table(d).n_rows() == 0);
}

TEST_CASE("random walk episode length matches the hitting-time oracle") {
  // Uniform random moves in a 2x3 room, walls reflect; goal at the far corner.
  std::istringstream in("#####\n#a..#\n#..0#\n#####\n");
  TaskSpec spec;
  spec.n_agents = 1;
  spec.episode_cap = 100000;
  const auto task = make_task(GridMap::parse(in), spec);
  const int n = task.map.n_free();
  const int goal = task.goals[0][0];
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
  for (int s = 0; s < n; ++s) {
    if (s == goal) {
      b(s) = 0;
      continue;
    }
    for (int m = 0; m < kNumMoves; ++m) {
      const int nx = task.map.move(s, m);
      if (nx != goal) a(s, nx) -= 0.25;
    }
  }
  const Eigen::VectorXd h = a.partialPivLu().solve(b);
  const double expected = h(task.starts[0]);

  auto cfg = quiet(1.0);
  cfg.seed = 99;
  Learner l(task, LearnerKind::Random, {}, cfg);
  auto known = make_known_sets(task, KnownBootstrap::Reachable);
  const int episodes = 20000;
  double sum = 0, sum_sq = 0;
  for (int e = 0; e < episodes; ++e) {
    const double steps = l.run_episode(known, 1.0).steps;
    sum += steps;
    sum_sq += steps * steps;
  }
  const double mean = sum / episodes;
  const double se = std::sqrt((sum_sq / episodes - mean * mean) / episodes);
  CHECK(std::abs(mean - expected) < 4 * se);
}

TEST_CASE("known set grows along every trajectory") {
  const auto task = fourroom_2agent();
  auto cfg = quiet(1.0);
  cfg.known = KnownBootstrap::Start;
  Learner l(task, LearnerKind::CentQ, {}, cfg);
  auto known = make_known_sets(task, KnownBootstrap::Start);
  CHECK(known[0].known_joint(task.starts));
  std::vector<JointState> seen;
  for (int e = 0; e < 5; ++e) {
    const auto before = known[0].n_known_individual(0);
    l.run_episode(known, 1.0);
    CHECK(known[0].n_known_individual(0) >= before);
    seen.insert(seen.end(), l.last_trajectory().begin(), l.last_trajectory().end());
    for (const auto& s : seen) CHECK(known[0].known_joint(s));
  }
}

TEST_CASE("single options are shared by index under forced centralization") {
  const auto task = fourroom_2agent();
  const auto single = build_options(task, OptionSource::Single, DiscoveryConfig{});
  REQUIRE(single[0].single.size() == 2);
  CHECK(kind_of([&] { Learner(task, LearnerKind::CentQForce, single, quiet(0.1)); }) == ErrorKind::ModeMismatch);

  const auto shared = share_single_options(single);
  REQUIRE(shared[0].multi.size() == single[0].single[0].size());
  CHECK(shared[0].single.empty());
  for (std::size_t k = 0; k < shared[0].multi.size(); ++k) {
    const auto& m = shared[0].multi[k];
    CHECK(m.agents == std::vector<int>{0, 1});
    CHECK(m.target == std::vector<int>{single[0].single[0][k].target, single[0].single[1][k].target});
  }
  Learner ok(task, LearnerKind::CentQForce, shared, quiet(0.1));
  CHECK(ok.q_table(0).n_choices() == 16 + static_cast<int>(shared[0].multi.size()));
}

TEST_CASE("training is reproducible per seed") {
  const auto task = fourroom_2agent();
  DiscoveryConfig dc;
  dc.max_targets_per_extremum = 1;
  const auto opts = build_options(task, OptionSource::Multi, dc);
  auto cfg = quiet(0.3, 40, 0.1);
  const auto a = train(task, LearnerKind::CentQForce, OptionSource::Multi, opts, cfg);
  const auto b = train(task, LearnerKind::CentQForce, OptionSource::Multi, opts, cfg);
  REQUIRE(a.episodes.size() == 40);
  for (std::size_t e = 0; e < a.episodes.size(); ++e) {
    CHECK(a.episodes[e].steps == b.episodes[e].steps);
    CHECK(a.episodes[e].cumulative_reward == b.episodes[e].cumulative_reward);
  }
  for (const auto& ep : a.episodes) {
    CHECK(ep.steps >= 1);
    CHECK(ep.steps <= task.episode_cap);
    CHECK(ep.cumulative_reward >= 0.0);
    CHECK(ep.cumulative_reward <= 1.0);
  }
}
