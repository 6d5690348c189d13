#include "maco/option_model.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace maco {

KnownSet::KnownSet(std::vector<int> dims, std::uint64_t exact_cap) : dims_(std::move(dims)) {
  std::uint64_t total = 1;
  bool fits = true;
  for (int d : dims_) {
    if (d < 1) throw Error(ErrorKind::IndexOutOfRange, "known-set dimension must be positive");
    if (total > exact_cap / static_cast<std::uint64_t>(d)) fits = false;
    else total *= static_cast<std::uint64_t>(d);
  }
  exact_ = fits && total <= exact_cap;
  for (int d : dims_) {
    individual_.emplace_back(static_cast<std::size_t>(d), 0);
    seeded_.emplace_back(static_cast<std::size_t>(d), 0);
  }
}

void KnownSet::visit(std::span<const int> group_state) {
  if (group_state.size() != dims_.size()) throw Error(ErrorKind::IndexOutOfRange, "group state arity mismatch");
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    const int s = group_state[k];
    if (s < 0 || s >= dims_[k]) throw Error(ErrorKind::IndexOutOfRange, "state outside factor");
    individual_[k][static_cast<std::size_t>(s)] = 1;
  }
  if (exact_) joint_.insert(joint_index(group_state, dims_));
}

void KnownSet::seed_product(const std::vector<std::vector<int>>& per_member) {
  if (per_member.size() != dims_.size()) throw Error(ErrorKind::IndexOutOfRange, "seed arity mismatch");
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    for (int s : per_member[k]) {
      if (s < 0 || s >= dims_[k]) throw Error(ErrorKind::IndexOutOfRange, "seed state outside factor");
      individual_[k][static_cast<std::size_t>(s)] = 1;
      seeded_[k][static_cast<std::size_t>(s)] = 1;
    }
  }
  any_seeded_ = true;
}

bool KnownSet::known_individual(int member, int s) const {
  if (member < 0 || member >= static_cast<int>(dims_.size())) throw Error(ErrorKind::IndexOutOfRange, "member index");
  if (s < 0 || s >= dims_[static_cast<std::size_t>(member)]) return false;
  return individual_[static_cast<std::size_t>(member)][static_cast<std::size_t>(s)] != 0;
}

bool KnownSet::known_joint(std::span<const int> group_state) const {
  if (group_state.size() != dims_.size()) throw Error(ErrorKind::IndexOutOfRange, "group state arity mismatch");
  bool all_individual = true;
  bool all_seeded = any_seeded_;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    const int s = group_state[k];
    if (s < 0 || s >= dims_[k]) return false;
    all_individual = all_individual && individual_[k][static_cast<std::size_t>(s)];
    all_seeded = all_seeded && seeded_[k][static_cast<std::size_t>(s)];
  }
  if (all_seeded) return true;
  if (!exact_) return all_individual;
  return all_individual && joint_.count(joint_index(group_state, dims_)) > 0;
}

std::size_t KnownSet::n_known_individual(int member) const {
  if (member < 0 || member >= static_cast<int>(dims_.size())) throw Error(ErrorKind::IndexOutOfRange, "member index");
  const auto& v = individual_[static_cast<std::size_t>(member)];
  return static_cast<std::size_t>(std::count(v.begin(), v.end(), char{1}));
}

bool MultiAgentOption::terminates(std::span<const int> group_state, const KnownSet& known) const {
  if (std::equal(group_state.begin(), group_state.end(), target.begin(), target.end())) return true;
  return !known.known_joint(group_state);
}

bool SingleAgentOption::terminates(int s, const KnownSet& known, int member) const {
  return s == target || !known.known_individual(member, s);
}

namespace {

class PolicyCache {
 public:
  explicit PolicyCache(std::span<const TransitionModel> models) : models_(models) {}

  const DeterministicPolicy& get(std::size_t factor, int target) {
    auto key = std::make_pair(factor, target);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, value_iteration_policy(models_[factor], target)).first;
    return it->second;
  }

 private:
  std::span<const TransitionModel> models_;
  std::map<std::pair<std::size_t, int>, DeterministicPolicy> cache_;
};

std::vector<std::uint64_t> select_targets(const std::vector<std::uint64_t>& tied, const std::set<std::uint64_t>& used,
                                          const std::vector<FactorGraph>& graphs, std::span<const int> dims,
                                          const DiscoveryConfig& cfg) {
  if (cfg.max_targets_per_extremum == 0) return tied;
  std::vector<std::uint64_t> fresh;
  for (auto x : tied)
    if (!used.count(x)) fresh.push_back(x);
  if (fresh.size() <= cfg.max_targets_per_extremum) return fresh;

  std::vector<long long> score(fresh.size(), 0);
  if (!cfg.reference.empty()) {
    std::vector<std::vector<int>> dist;
    for (std::size_t i = 0; i < graphs.size(); ++i) dist.push_back(bfs_distances(graphs[i], cfg.reference[i]));
    for (std::size_t k = 0; k < fresh.size(); ++k) {
      const auto parts = decompose_index(fresh[k], dims);
      for (std::size_t i = 0; i < parts.size(); ++i) score[k] += dist[i][static_cast<std::size_t>(parts[i])];
    }
  }
  std::vector<std::size_t> order(fresh.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  std::vector<std::uint64_t> out;
  for (std::size_t k = 0; k < cfg.max_targets_per_extremum; ++k) out.push_back(fresh[order[k]]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<MultiAgentOption> generate_options(std::span<const std::vector<int>> targets,
                                               std::span<const TransitionModel> models, std::span<const int> agent_ids) {
  PolicyCache cache(models);
  std::vector<MultiAgentOption> out;
  for (const auto& t : targets) {
    if (t.size() != models.size()) throw Error(ErrorKind::IndexOutOfRange, "target arity does not match the models");
    MultiAgentOption o;
    o.agents.assign(agent_ids.begin(), agent_ids.end());
    o.target = t;
    for (std::size_t i = 0; i < t.size(); ++i) o.intra_policies.push_back(cache.get(i, t[i]));
    out.push_back(std::move(o));
  }
  return out;
}

std::size_t update_adjacency(std::vector<FactorGraph>& graphs, std::span<const std::vector<int>> mins,
                             std::span<const std::vector<int>> maxs) {
  std::size_t added = 0;
  for (const auto& a : mins) {
    for (const auto& b : maxs) {
      if (a.size() != graphs.size() || b.size() != graphs.size()) {
        throw Error(ErrorKind::IndexOutOfRange, "joint state arity does not match the factor graphs");
      }
      for (std::size_t i = 0; i < graphs.size(); ++i)
        if (graphs[i].add_edge(a[i], b[i])) ++added;
    }
  }
  return added;
}

DiscoveryResult discover_multiagent_options(std::vector<FactorGraph> graphs, std::span<const TransitionModel> models,
                                            const DiscoveryConfig& cfg, std::vector<int> agent_ids) {
  const std::size_t n = graphs.size();
  if (n == 0) throw Error(ErrorKind::TooSmall, "discovery needs at least one factor graph");
  if (models.size() != n) throw Error(ErrorKind::IndexOutOfRange, "one transition model per factor graph required");
  if (!cfg.reference.empty() && cfg.reference.size() != n) throw Error(ErrorKind::Config, "reference state arity mismatch");
  if (agent_ids.empty()) {
    agent_ids.resize(n);
    std::iota(agent_ids.begin(), agent_ids.end(), 0);
  }
  std::vector<int> dims;
  for (std::size_t i = 0; i < n; ++i) {
    if (models[i].n_states() != graphs[i].n_nodes()) throw Error(ErrorKind::IndexOutOfRange, "model/graph size mismatch");
    dims.push_back(graphs[i].n_nodes());
  }

  DiscoveryResult result;
  std::set<std::uint64_t> used;
  PolicyCache cache(models);
  while (result.options.size() < cfg.tot_num) {
    if (result.iterations.size() >= cfg.max_iterations) {
      throw Error(ErrorKind::NonConvergent, "option budget not reached after " + std::to_string(cfg.max_iterations) + " iterations");
    }
    const auto fs = factor_spectra(graphs);
    DiscoveryIteration it;
    it.candidates = estimate_joint_fiedler(fs, cfg.kron);
    std::vector<std::pair<std::vector<std::vector<int>>, std::vector<std::vector<int>>>> links;
    for (const auto& c : it.candidates) {
      const auto ex = kron_extrema(fs, c, cfg.extremum_tol, cfg.kron);
      Extrema chosen;
      chosen.min = select_targets(ex.min, used, graphs, dims, cfg);
      std::set<std::uint64_t> used_with_min = used;
      used_with_min.insert(chosen.min.begin(), chosen.min.end());
      chosen.max = select_targets(ex.max, used_with_min, graphs, dims, cfg);

      std::pair<std::vector<std::vector<int>>, std::vector<std::vector<int>>> link;
      for (auto x : chosen.min) link.first.push_back(decompose_index(x, dims));
      for (auto x : chosen.max) link.second.push_back(decompose_index(x, dims));
      for (const auto* side : {&chosen.min, &chosen.max}) {
        for (auto x : *side) {
          if (used.insert(x).second) it.new_targets.push_back(decompose_index(x, dims));
        }
      }
      links.push_back(std::move(link));
      it.extrema.push_back(std::move(chosen));
    }
    if (it.new_targets.empty()) {
      throw Error(ErrorKind::NonConvergent, "iteration " + std::to_string(result.iterations.size()) + " found no new targets");
    }
    for (const auto& [mins, maxs] : links) update_adjacency(graphs, mins, maxs);
    for (const auto& t : it.new_targets) {
      MultiAgentOption o;
      o.agents = agent_ids;
      o.target = t;
      for (std::size_t i = 0; i < n; ++i) o.intra_policies.push_back(cache.get(i, t[i]));
      result.options.push_back(std::move(o));
    }
    result.iterations.push_back(std::move(it));
  }
  result.graphs = std::move(graphs);
  return result;
}

std::vector<SingleAgentOption> discover_single_agent_options(FactorGraph g, const TransitionModel& model,
                                                             std::size_t num, int agent) {
  if (model.n_states() != g.n_nodes()) throw Error(ErrorKind::IndexOutOfRange, "model/graph size mismatch");
  std::vector<SingleAgentOption> out;
  std::set<std::pair<int, int>> emitted;
  std::map<int, DeterministicPolicy> policies;
  auto policy = [&](int target) -> const DeterministicPolicy& {
    auto it = policies.find(target);
    if (it == policies.end()) it = policies.emplace(target, value_iteration_policy(model, target)).first;
    return it->second;
  };
  while (out.size() < num) {
    const auto f = fiedler(g).vector;
    Eigen::Index lo = 0, hi = 0;
    f.minCoeff(&lo);
    f.maxCoeff(&hi);
    int i = static_cast<int>(std::min(lo, hi));
    int j = static_cast<int>(std::max(lo, hi));
    if (g.has_edge(i, j)) {
      try {
        std::tie(i, j) = greedy_edge(g);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Degenerate) throw;
      }
    }
    if (!emitted.insert({i, j}).second) {
      throw Error(ErrorKind::NonConvergent, "no new state pair to connect after " + std::to_string(out.size()) + " options");
    }
    out.push_back({agent, i, j, policy(j)});
    if (out.size() < num) out.push_back({agent, j, i, policy(i)});
    g.add_edge(i, j);
  }
  return out;
}

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? " " : "") << v[k];
  return os.str();
}

std::vector<int> split_ints(const std::string& s) {
  std::istringstream is(s);
  std::vector<int> out;
  int x = 0;
  while (is >> x) out.push_back(x);
  if (!is.eof()) throw Error(ErrorKind::Io, "bad integer list '" + s + "'");
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

void write_option_manifest(std::ostream& out, std::span<const MultiAgentOption> multi,
                           std::span<const SingleAgentOption> single) {
  out << "option,kind,agents,origin,target,actions\n";
  std::size_t id = 0;
  for (const auto& o : multi) {
    out << id++ << ",multi," << join_ints(o.agents) << ",," << join_ints(o.target) << ',';
    for (std::size_t k = 0; k < o.intra_policies.size(); ++k) out << (k ? "|" : "") << join_ints(o.intra_policies[k].table());
    out << '\n';
  }
  for (const auto& o : single) {
    out << id++ << ",single," << o.agent << ',' << o.origin << ',' << o.target << ',' << join_ints(o.intra_policy.table())
        << '\n';
  }
}

OptionManifest read_option_manifest(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "option,kind,agents,origin,target,actions") {
    throw Error(ErrorKind::SchemaMismatch, "option manifest header mismatch");
  }
  OptionManifest m;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 6) throw Error(ErrorKind::SchemaMismatch, "option manifest row needs 6 columns");
    const auto agents = split_ints(cols[2]);
    const auto target = split_ints(cols[4]);
    const auto tables = split(cols[5], '|');
    if (cols[1] == "multi") {
      if (tables.size() != target.size() || agents.size() != target.size()) {
        throw Error(ErrorKind::SchemaMismatch, "multi option arity mismatch");
      }
      MultiAgentOption o{agents, target, {}};
      for (std::size_t k = 0; k < tables.size(); ++k) o.intra_policies.emplace_back(split_ints(tables[k]), target[k]);
      m.multi.push_back(std::move(o));
    } else if (cols[1] == "single") {
      if (agents.size() != 1 || target.size() != 1 || tables.size() != 1) {
        throw Error(ErrorKind::SchemaMismatch, "single option arity mismatch");
      }
      const auto origin = split_ints(cols[3]);
      if (origin.size() != 1) throw Error(ErrorKind::SchemaMismatch, "single option needs an origin");
      m.single.push_back({agents[0], origin[0], target[0], DeterministicPolicy(split_ints(tables[0]), target[0])});
    } else {
      throw Error(ErrorKind::SchemaMismatch, "unknown option kind '" + cols[1] + "'");
    }
  }
  return m;
}

}  // namespace maco
