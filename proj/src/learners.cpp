#include "maco/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maco {

LearnerKind parse_learner(const std::string& s) {
  if (s == "random") return LearnerKind::Random;
  if (s == "iql") return LearnerKind::Iql;
  if (s == "distq") return LearnerKind::DistQ;
  if (s == "centq") return LearnerKind::CentQ;
  if (s == "centq_force") return LearnerKind::CentQForce;
  throw Error(ErrorKind::Config, "unknown learner '" + s + "'");
}

OptionSource parse_option_source(const std::string& s) {
  if (s == "none") return OptionSource::None;
  if (s == "single") return OptionSource::Single;
  if (s == "multi") return OptionSource::Multi;
  throw Error(ErrorKind::Config, "unknown option source '" + s + "'");
}

KnownBootstrap parse_known_bootstrap(const std::string& s) {
  if (s == "reachable") return KnownBootstrap::Reachable;
  if (s == "start") return KnownBootstrap::Start;
  throw Error(ErrorKind::Config, "unknown known-set bootstrap '" + s + "'");
}

std::string to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::Random: return "random";
    case LearnerKind::Iql: return "iql";
    case LearnerKind::DistQ: return "distq";
    case LearnerKind::CentQ: return "centq";
    case LearnerKind::CentQForce: return "centq_force";
  }
  return "?";
}

std::string to_string(OptionSource s) {
  switch (s) {
    case OptionSource::None: return "none";
    case OptionSource::Single: return "single";
    case OptionSource::Multi: return "multi";
  }
  return "?";
}

namespace {

std::uint64_t checked_pow(std::uint64_t base, int n) {
  std::uint64_t p = 1;
  for (int i = 0; i < n; ++i) {
    if (p > std::numeric_limits<std::uint64_t>::max() / base) throw Error(ErrorKind::Overflow, "choice count overflows");
    p *= base;
  }
  return p;
}

constexpr std::uint64_t kMaxChoices = 1u << 20;

}  // namespace

std::uint64_t ActionSpaceSpec::joint_choices() const {
  if (centralized_force) {
    const auto p = checked_pow(kNumMoves, n_agents);
    return p + static_cast<std::uint64_t>(k);
  }
  return checked_pow(static_cast<std::uint64_t>(kNumMoves + k), n_agents);
}

int greedy_choice(std::span<const double> q, std::span<const char> mask) {
  int best = -1;
  for (std::size_t c = 0; c < q.size(); ++c) {
    if (!mask[c]) continue;
    if (best < 0 || q[c] > q[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

std::span<const double> QTable::row(std::uint64_t key) const {
  auto it = rows_.find(key);
  if (it != rows_.end()) return it->second;
  if (zeros_.size() != static_cast<std::size_t>(n_choices_)) zeros_.assign(static_cast<std::size_t>(n_choices_), 0.0);
  return zeros_;
}

void QTable::set(std::uint64_t key, int choice, double value) {
  if (choice < 0 || choice >= n_choices_) throw Error(ErrorKind::IndexOutOfRange, "choice outside Q-table");
  if (!std::isfinite(value)) throw Error(ErrorKind::Degenerate, "non-finite Q-value");
  auto [it, fresh] = rows_.try_emplace(key);
  if (fresh) it->second.assign(static_cast<std::size_t>(n_choices_), 0.0);
  it->second[static_cast<std::size_t>(choice)] = value;
}

void LearnerConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::Config, "alpha must lie in (0, 1]");
  for (double e : {eps_start, eps_end})
    if (!(e >= 0.0 && e <= 1.0)) throw Error(ErrorKind::Config, "epsilon must lie in [0, 1]");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(ErrorKind::Config, "gamma must lie in (0, 1]");
  if (!(eps_decay_fraction >= 0.0 && eps_decay_fraction <= 1.0)) throw Error(ErrorKind::Config, "eps_decay_fraction must lie in [0, 1]");
  if (episodes < 0) throw Error(ErrorKind::Config, "episodes must be non-negative");
}

double LearnerConfig::epsilon(int episode) const {
  const double horizon = eps_decay_fraction * episodes;
  if (horizon <= 0.0 || episode >= horizon) return eps_end;
  return eps_start + (eps_end - eps_start) * (episode / horizon);
}

bool GroupOptions::empty() const {
  if (!multi.empty()) return false;
  for (const auto& s : single)
    if (!s.empty()) return false;
  return true;
}

OptionSet build_options(const GridTask& task, OptionSource source, const DiscoveryConfig& cfg) {
  OptionSet out(task.groups.size());
  if (source == OptionSource::None) return out;
  const auto graph = adjacency_from_map(task.map);
  const auto model = transition_model(task.map);
  if (source == OptionSource::Single) {
    const auto base = discover_single_agent_options(graph, model, cfg.tot_num, 0);
    for (std::size_t g = 0; g < task.groups.size(); ++g) {
      for (int agent : task.groups[g]) {
        auto mine = base;
        for (auto& o : mine) o.agent = agent;
        out[g].single.push_back(std::move(mine));
      }
    }
    return out;
  }
  for (std::size_t g = 0; g < task.groups.size(); ++g) {
    const auto& members = task.groups[g];
    std::vector<FactorGraph> graphs(members.size(), graph);
    std::vector<TransitionModel> models(members.size(), model);
    DiscoveryConfig c = cfg;
    if (c.reference.empty())
      for (int a : members) c.reference.push_back(task.starts[static_cast<std::size_t>(a)]);
    out[g].multi = discover_multiagent_options(std::move(graphs), models, c, members).options;
  }
  return out;
}

OptionSet share_single_options(const OptionSet& options) {
  OptionSet out = options;
  for (auto& g : out) {
    if (g.single.empty() || !g.multi.empty()) continue;
    std::size_t k = g.single.front().size();
    for (const auto& s : g.single) k = std::min(k, s.size());
    for (std::size_t o = 0; o < k; ++o) {
      MultiAgentOption m;
      for (const auto& s : g.single) {
        m.agents.push_back(s[o].agent);
        m.target.push_back(s[o].target);
        m.intra_policies.push_back(s[o].intra_policy);
      }
      g.multi.push_back(std::move(m));
    }
    g.single.clear();
  }
  return out;
}

std::vector<KnownSet> make_known_sets(const GridTask& task, KnownBootstrap bootstrap) {
  std::vector<KnownSet> out;
  const auto graph = adjacency_from_map(task.map);
  for (const auto& members : task.groups) {
    KnownSet k(std::vector<int>(members.size(), task.map.n_free()));
    if (bootstrap == KnownBootstrap::Reachable) {
      std::vector<std::vector<int>> reach;
      for (int a : members) {
        const auto dist = bfs_distances(graph, task.starts[static_cast<std::size_t>(a)]);
        std::vector<int> cells;
        for (int s = 0; s < task.map.n_free(); ++s)
          if (dist[static_cast<std::size_t>(s)] >= 0) cells.push_back(s);
        reach.push_back(std::move(cells));
      }
      k.seed_product(reach);
    } else {
      std::vector<int> gs;
      for (int a : members) gs.push_back(task.starts[static_cast<std::size_t>(a)]);
      k.visit(gs);
    }
    out.push_back(std::move(k));
  }
  return out;
}

Learner::Learner(const GridTask& task, LearnerKind kind, OptionSet options, const LearnerConfig& cfg)
    : task_(task), kind_(kind), options_(std::move(options)), cfg_(cfg), rng_(cfg.seed) {
  cfg_.validate();
  if (options_.empty()) options_.resize(task_.groups.size());
  if (options_.size() != task_.groups.size()) throw Error(ErrorKind::ModeMismatch, "option set does not match the task groups");

  member_of_.assign(static_cast<std::size_t>(task_.n_agents), -1);
  group_of_.assign(static_cast<std::size_t>(task_.n_agents), -1);
  for (std::size_t g = 0; g < task_.groups.size(); ++g) {
    group_dims_.emplace_back(task_.groups[g].size(), task_.map.n_free());
    for (std::size_t m = 0; m < task_.groups[g].size(); ++m) {
      const int a = task_.groups[g][m];
      if (a < 0 || a >= task_.n_agents || group_of_[static_cast<std::size_t>(a)] >= 0) {
        throw Error(ErrorKind::BadPartition, "groups must partition the agents");
      }
      group_of_[static_cast<std::size_t>(a)] = static_cast<int>(g);
      member_of_[static_cast<std::size_t>(a)] = static_cast<int>(m);
    }
  }
  if (std::count(group_of_.begin(), group_of_.end(), -1) > 0) throw Error(ErrorKind::BadPartition, "agent without a group");

  for (std::size_t g = 0; g < task_.groups.size(); ++g) {
    const auto& opt = options_[g];
    const int n = static_cast<int>(task_.groups[g].size());
    if (!opt.single.empty() && static_cast<int>(opt.single.size()) != n) {
      throw Error(ErrorKind::ModeMismatch, "single options must be given per group member");
    }
    for (const auto& m : opt.multi)
      if (static_cast<int>(m.target.size()) != n) throw Error(ErrorKind::ModeMismatch, "multi option arity differs from its group");
    auto k_of = [&](int m) {
      if (!opt.multi.empty()) return static_cast<int>(opt.multi.size());
      if (!opt.single.empty()) return static_cast<int>(opt.single[static_cast<std::size_t>(m)].size());
      return 0;
    };
    if (kind_ == LearnerKind::CentQForce) {
      if (opt.multi.empty() && !opt.empty()) {
        throw Error(ErrorKind::ModeMismatch, "centq_force needs options shared by the whole group");
      }
      Decider d;
      d.group = static_cast<int>(g);
      for (int m = 0; m < n; ++m) d.members.push_back(m);
      const auto count = ActionSpaceSpec{n, k_of(0), true}.joint_choices();
      if (count > kMaxChoices) throw Error(ErrorKind::Overflow, "too many joint choices");
      d.n_choices = static_cast<int>(count);
      d.joint_obs = true;
      d.q = QTable(d.n_choices);
      deciders_.push_back(std::move(d));
    } else if (kind_ == LearnerKind::CentQ) {
      Decider d;
      d.group = static_cast<int>(g);
      std::uint64_t count = 1;
      for (int m = 0; m < n; ++m) {
        d.members.push_back(m);
        d.radix.push_back(kNumMoves + k_of(m));
        count *= static_cast<std::uint64_t>(d.radix.back());
        if (count > kMaxChoices) throw Error(ErrorKind::Overflow, "too many joint choices");
      }
      d.n_choices = static_cast<int>(count);
      d.joint_obs = true;
      d.q = QTable(d.n_choices);
      deciders_.push_back(std::move(d));
    } else {
      for (int m = 0; m < n; ++m) {
        Decider d;
        d.group = static_cast<int>(g);
        d.members = {m};
        d.n_choices = kNumMoves + k_of(m);
        d.joint_obs = kind_ != LearnerKind::Iql;
        d.q = QTable(d.n_choices);
        deciders_.push_back(std::move(d));
      }
    }
  }
}

ActionSpaceSpec Learner::action_space(std::size_t decider) const {
  const auto& d = deciders_.at(decider);
  const auto& opt = options_[static_cast<std::size_t>(d.group)];
  int k = static_cast<int>(opt.multi.size());
  if (opt.multi.empty() && !opt.single.empty()) k = static_cast<int>(opt.single[static_cast<std::size_t>(d.members[0])].size());
  return {static_cast<int>(d.members.size()), k, kind_ == LearnerKind::CentQForce};
}

std::vector<int> Learner::group_state(int group, std::span<const int> state) const {
  std::vector<int> gs;
  for (int a : task_.groups[static_cast<std::size_t>(group)]) gs.push_back(state[static_cast<std::size_t>(a)]);
  return gs;
}

std::uint64_t Learner::observe(const Decider& d, std::span<const int> state) const {
  const auto gs = group_state(d.group, state);
  if (d.joint_obs) return joint_index(gs, group_dims_[static_cast<std::size_t>(d.group)]);
  return static_cast<std::uint64_t>(gs[static_cast<std::size_t>(d.members[0])]);
}

bool Learner::member_option_available(int group, int member, int /*option*/, std::span<const int> gs,
                                      const KnownSet& known) const {
  const auto& opt = options_[static_cast<std::size_t>(group)];
  if (!opt.multi.empty()) return known.known_joint(gs);
  return known.known_individual(member, gs[static_cast<std::size_t>(member)]);
}

void Learner::choice_mask(const Decider& d, std::span<const int> state, const std::vector<KnownSet>& known,
                          std::vector<char>& mask) const {
  mask.assign(static_cast<std::size_t>(d.n_choices), 1);
  const auto gs = group_state(d.group, state);
  const auto& kn = known[static_cast<std::size_t>(d.group)];
  if (kind_ == LearnerKind::CentQForce) {
    const int first_option = d.n_choices - static_cast<int>(options_[static_cast<std::size_t>(d.group)].multi.size());
    const bool ok = kn.known_joint(gs);
    for (int c = first_option; c < d.n_choices; ++c) mask[static_cast<std::size_t>(c)] = ok;
    return;
  }
  if (kind_ == LearnerKind::CentQ) {
    std::vector<std::vector<char>> avail;
    for (std::size_t k = 0; k < d.members.size(); ++k) {
      std::vector<char> a(static_cast<std::size_t>(d.radix[k]), 1);
      for (int o = kNumMoves; o < d.radix[k]; ++o)
        a[static_cast<std::size_t>(o)] = member_option_available(d.group, d.members[k], o - kNumMoves, gs, kn);
      avail.push_back(std::move(a));
    }
    for (int c = 0; c < d.n_choices; ++c) {
      int rest = c;
      bool ok = true;
      for (std::size_t k = d.members.size(); k-- > 0;) {
        ok = ok && avail[k][static_cast<std::size_t>(rest % d.radix[k])];
        rest /= d.radix[k];
      }
      mask[static_cast<std::size_t>(c)] = ok;
    }
    return;
  }
  for (int o = kNumMoves; o < d.n_choices; ++o)
    mask[static_cast<std::size_t>(o)] = member_option_available(d.group, d.members[0], o - kNumMoves, gs, kn);
}

std::vector<Learner::Component> Learner::decode(const Decider& d, int choice) const {
  const auto& opt = options_[static_cast<std::size_t>(d.group)];
  const std::size_t n = d.members.size();
  std::vector<Component> out(n);
  auto option_component = [&](int member, int o) {
    Component c;
    if (!opt.multi.empty()) {
      const auto& m = opt.multi[static_cast<std::size_t>(o)];
      c.policy = &m.intra_policies[static_cast<std::size_t>(member)];
      c.target = m.target[static_cast<std::size_t>(member)];
      c.multi = true;
    } else {
      const auto& s = opt.single[static_cast<std::size_t>(member)][static_cast<std::size_t>(o)];
      c.policy = &s.intra_policy;
      c.target = s.target;
    }
    return c;
  };

  if (kind_ == LearnerKind::CentQForce) {
    const int n_prim = d.n_choices - static_cast<int>(opt.multi.size());
    if (choice < n_prim) {
      int rest = choice;
      for (std::size_t k = n; k-- > 0;) {
        out[k].primitive = rest % kNumMoves;
        rest /= kNumMoves;
      }
    } else {
      for (std::size_t k = 0; k < n; ++k) out[k] = option_component(d.members[k], choice - n_prim);
    }
    return out;
  }
  if (kind_ == LearnerKind::CentQ) {
    int rest = choice;
    for (std::size_t k = n; k-- > 0;) {
      const int digit = rest % d.radix[k];
      rest /= d.radix[k];
      if (digit < kNumMoves) out[k].primitive = digit;
      else out[k] = option_component(d.members[k], digit - kNumMoves);
    }
    return out;
  }
  if (choice < kNumMoves) out[0].primitive = choice;
  else out[0] = option_component(d.members[0], choice - kNumMoves);
  return out;
}

int Learner::member_action(const Component& c, int cell) const {
  if (c.primitive >= 0) return c.primitive;
  if (cell == c.target) return kStay;
  return c.policy->action(cell);
}

bool Learner::finished(const Decider& d, std::span<const int> state, const KnownSet& known) const {
  const auto comps = decode(d, d.choice);
  const auto gs = group_state(d.group, state);
  if (kind_ == LearnerKind::CentQForce && comps[0].primitive < 0) {
    bool all = true;
    for (std::size_t k = 0; k < comps.size(); ++k)
      all = all && gs[static_cast<std::size_t>(d.members[k])] == comps[k].target;
    return all || !known.known_joint(gs);
  }
  for (std::size_t k = 0; k < comps.size(); ++k) {
    if (comps[k].primitive >= 0) return true;
    const int cell = gs[static_cast<std::size_t>(d.members[k])];
    if (cell == comps[k].target || !known.known_individual(d.members[k], cell)) return true;
  }
  return false;
}

int Learner::pick(const Decider& d, std::span<const int> state, const std::vector<KnownSet>& known, double epsilon) {
  std::vector<char> mask;
  choice_mask(d, state, known, mask);
  std::vector<int> allowed;
  for (int c = 0; c < d.n_choices; ++c)
    if (mask[static_cast<std::size_t>(c)]) allowed.push_back(c);
  if (allowed.empty()) throw Error(ErrorKind::Degenerate, "no available choice");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool explore = kind_ == LearnerKind::Random || unit(rng_) < epsilon;
  if (explore) {
    std::uniform_int_distribution<std::size_t> pick_idx(0, allowed.size() - 1);
    return allowed[pick_idx(rng_)];
  }
  return greedy_choice(d.q.row(d.obs), mask);
}

EpisodeRecord Learner::run_episode(std::vector<KnownSet>& known, double epsilon, bool learn) {
  if (known.size() != task_.groups.size()) throw Error(ErrorKind::ModeMismatch, "one known set per group required");
  JointState state = task_.starts;
  if (task_.random_starts) {
    std::uniform_int_distribution<int> cell(0, task_.map.n_free() - 1);
    do {
      for (auto& s : state) s = cell(rng_);
      if (task_.collision) {
        std::vector<int> sorted = state;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
      }
      if (!task_.completed(state)) break;
    } while (true);
  }
  for (std::size_t g = 0; g < task_.groups.size(); ++g) known[g].visit(group_state(static_cast<int>(g), state));
  trajectory_.assign(1, state);
  for (auto& d : deciders_) d.active = false;

  EpisodeRecord rec;
  std::vector<int> actions(static_cast<std::size_t>(task_.n_agents), kStay);
  std::vector<char> mask;
  double weight = 1.0;
  for (;;) {
    for (auto& d : deciders_) {
      if (d.active) continue;
      d.obs = observe(d, state);
      d.choice = pick(d, state, known, epsilon);
      d.active = true;
      d.r_cum = 0.0;
      d.tau = 0;
    }
    for (const auto& d : deciders_) {
      const auto comps = decode(d, d.choice);
      const auto& members = task_.groups[static_cast<std::size_t>(d.group)];
      for (std::size_t k = 0; k < comps.size(); ++k) {
        const int agent = members[static_cast<std::size_t>(d.members[k])];
        actions[static_cast<std::size_t>(agent)] = member_action(comps[k], state[static_cast<std::size_t>(agent)]);
      }
    }
    const auto res = step(task_, state, actions, rec.steps);
    rec.cumulative_reward += weight * res.reward;
    weight *= task_.discount;
    ++rec.steps;
    for (std::size_t g = 0; g < task_.groups.size(); ++g) known[g].visit(group_state(static_cast<int>(g), res.next));

    for (auto& d : deciders_) {
      d.r_cum += std::pow(cfg_.gamma, d.tau) * res.reward;
      ++d.tau;
      if (!res.done && !finished(d, res.next, known[static_cast<std::size_t>(d.group)])) continue;
      d.active = false;
      if (!learn || kind_ == LearnerKind::Random) continue;
      double future = 0.0;
      if (!res.done) {
        choice_mask(d, res.next, known, mask);
        const auto row = d.q.row(observe(d, res.next));
        const int best = greedy_choice(row, mask);
        if (best >= 0) future = row[static_cast<std::size_t>(best)];
      }
      const double sample = d.r_cum + std::pow(cfg_.gamma, d.tau) * future;
      const double old = d.q.get(d.obs, d.choice);
      if (kind_ == LearnerKind::DistQ) {
        if (sample > old) d.q.set(d.obs, d.choice, sample);
      } else {
        d.q.set(d.obs, d.choice, old + cfg_.alpha * (sample - old));
      }
    }
    state = res.next;
    trajectory_.push_back(state);
    if (res.done) break;
  }
  return rec;
}

LearningRun train(const GridTask& task, LearnerKind kind, OptionSource source, const OptionSet& options,
                  const LearnerConfig& cfg) {
  cfg.validate();
  OptionSet used = source == OptionSource::None ? OptionSet(task.groups.size()) : options;
  if (kind == LearnerKind::CentQForce) used = share_single_options(used);
  Learner learner(task, kind, std::move(used), cfg);
  auto known = make_known_sets(task, cfg.known);
  LearningRun run{kind, source, cfg.seed, {}};
  run.episodes.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int e = 0; e < cfg.episodes; ++e) run.episodes.push_back(learner.run_episode(known, cfg.epsilon(e)));
  return run;
}

}  // namespace maco
