#include "maco/envs.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <random>
#include <set>

namespace maco {

GridMap GridMap::parse(std::istream& in, const std::string& name) {
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == ';') continue;
    if (line.empty()) {
      if (!rows.empty()) break;
      continue;
    }
    rows.push_back(line);
  }
  if (rows.empty()) throw Error(ErrorKind::BadMap, name + ": empty map");

  GridMap m;
  m.name_ = name;
  m.height_ = static_cast<int>(rows.size());
  m.width_ = static_cast<int>(rows[0].size());
  m.index_.assign(static_cast<std::size_t>(m.width_ * m.height_), -1);
  std::map<int, int> start_by_agent;
  for (int r = 0; r < m.height_; ++r) {
    if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != m.width_) {
      throw Error(ErrorKind::BadMap, name + ": row " + std::to_string(r) + " has a different width");
    }
    for (int c = 0; c < m.width_; ++c) {
      const char ch = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (ch == '#') continue;
      const bool ok = ch == '.' || (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'z');
      if (!ok) throw Error(ErrorKind::BadMap, name + ": unknown symbol '" + std::string(1, ch) + "'");
      const int idx = static_cast<int>(m.cells_.size());
      m.index_[static_cast<std::size_t>(r * m.width_ + c)] = idx;
      m.cells_.emplace_back(r, c);
      if (ch >= '0' && ch <= '9') m.goals_[ch - '0'].push_back(idx);
      if (ch >= 'a' && ch <= 'z') {
        if (!start_by_agent.emplace(ch - 'a', idx).second) {
          throw Error(ErrorKind::BadMap, name + ": start '" + std::string(1, ch) + "' appears twice");
        }
      }
    }
  }
  if (m.cells_.empty()) throw Error(ErrorKind::BadMap, name + ": no free cells");
  int expect = 0;
  for (auto [agent, cell] : start_by_agent) {
    if (agent != expect++) throw Error(ErrorKind::BadMap, name + ": start letters must be contiguous from 'a'");
    m.starts_.push_back(cell);
  }
  return m;
}

GridMap GridMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open map " + path);
  return parse(in, path);
}

int GridMap::cell_index(int row, int col) const {
  if (row < 0 || col < 0 || row >= height_ || col >= width_) return -1;
  return index_[static_cast<std::size_t>(row * width_ + col)];
}

std::pair<int, int> GridMap::coords(int cell) const {
  if (cell < 0 || cell >= n_free()) throw Error(ErrorKind::IndexOutOfRange, "cell " + std::to_string(cell));
  return cells_[static_cast<std::size_t>(cell)];
}

int GridMap::move(int cell, int a) const {
  if (a == kStay) return cell;
  auto [r, c] = coords(cell);
  switch (a) {
    case kUp: --r; break;
    case kDown: ++r; break;
    case kLeft: --c; break;
    case kRight: ++c; break;
    default: throw Error(ErrorKind::IndexOutOfRange, "action " + std::to_string(a));
  }
  const int nx = cell_index(r, c);
  return nx < 0 ? cell : nx;
}

FactorGraph adjacency_from_map(const GridMap& map) {
  FactorGraph g(map.n_free());
  for (int s = 0; s < map.n_free(); ++s)
    for (int a = 0; a < kNumMoves; ++a) g.add_edge(s, map.move(s, a));
  if (!g.is_connected()) throw Error(ErrorKind::Disconnected, map.name() + ": free cells are not connected");
  return g;
}

TransitionModel transition_model(const GridMap& map) {
  TransitionModel m;
  m.next.resize(map.n_free(), kNumMoves);
  for (int s = 0; s < map.n_free(); ++s)
    for (int a = 0; a < kNumMoves; ++a) m.next(s, a) = map.move(s, a);
  return m;
}

bool GridTask::at_goal(int agent, int cell) const {
  const auto& g = goals[static_cast<std::size_t>(agent)];
  return std::binary_search(g.begin(), g.end(), cell);
}

bool GridTask::completed(std::span<const int> state) const {
  for (int i = 0; i < n_agents; ++i)
    if (!at_goal(i, state[static_cast<std::size_t>(i)])) return false;
  return true;
}

GridTask make_task(const GridMap& map, const TaskSpec& spec) {
  if (spec.n_agents < 1) throw Error(ErrorKind::Config, "task needs at least one agent");
  if (map.goal_areas().empty()) throw Error(ErrorKind::BadMap, map.name() + ": no goal cells");
  GridTask t;
  t.map = map;
  t.n_agents = spec.n_agents;
  t.collision = spec.collision;
  t.random_starts = spec.random_starts;
  t.episode_cap = spec.episode_cap;
  t.discount = spec.discount;

  std::vector<int> ids;
  for (const auto& kv : map.goal_areas()) ids.push_back(kv.first);
  if (!spec.goal_id.empty()) {
    if (static_cast<int>(spec.goal_id.size()) != spec.n_agents) throw Error(ErrorKind::Config, "goal_id needs one entry per agent");
    t.goal_id = spec.goal_id;
  } else {
    const int n_goals = static_cast<int>(ids.size());
    if (spec.n_agents % n_goals != 0 && n_goals != 1) {
      throw Error(ErrorKind::Config, "cannot split agents evenly across " + std::to_string(n_goals) + " goals");
    }
    const int block = n_goals == 1 ? spec.n_agents : spec.n_agents / n_goals;
    for (int i = 0; i < spec.n_agents; ++i) t.goal_id.push_back(ids[static_cast<std::size_t>(i / block)]);
  }
  for (int gid : t.goal_id) {
    auto it = map.goal_areas().find(gid);
    if (it == map.goal_areas().end()) throw Error(ErrorKind::Config, "map has no goal " + std::to_string(gid));
    auto cells = it->second;
    std::sort(cells.begin(), cells.end());
    t.goals.push_back(std::move(cells));
  }

  t.starts = spec.starts.empty() ? map.starts() : spec.starts;
  if (static_cast<int>(t.starts.size()) != spec.n_agents) {
    throw Error(ErrorKind::Config, "need " + std::to_string(spec.n_agents) + " start cells, have " + std::to_string(t.starts.size()));
  }
  for (int s : t.starts)
    if (s < 0 || s >= map.n_free()) throw Error(ErrorKind::Config, "start cell outside the map");
  if (t.collision && std::set<int>(t.starts.begin(), t.starts.end()).size() != t.starts.size()) {
    throw Error(ErrorKind::Config, "collision tasks need distinct start cells");
  }
  t.groups = make_groups(t, GroupingMode::Singleton);
  return t;
}

StepResult step(const GridTask& task, std::span<const int> state, std::span<const int> actions, int steps_taken) {
  if (static_cast<int>(state.size()) != task.n_agents || actions.size() != state.size()) {
    throw Error(ErrorKind::IndexOutOfRange, "state/action arity does not match the task");
  }
  StepResult r;
  r.next.assign(state.begin(), state.end());
  for (int i = 0; i < task.n_agents; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const int target = task.map.move(r.next[ui], actions[ui]);
    if (task.collision && target != r.next[ui]) {
      bool occupied = false;
      for (int j = 0; j < task.n_agents; ++j)
        if (j != i && r.next[static_cast<std::size_t>(j)] == target) occupied = true;
      if (occupied) continue;
    }
    r.next[ui] = target;
  }
  r.completed = task.completed(r.next);
  r.reward = r.completed ? task.completion_reward : 0.0;
  r.done = r.completed || steps_taken + 1 >= task.episode_cap;
  return r;
}

GroupingMode parse_grouping(const std::string& s) {
  if (s == "subtask") return GroupingMode::Subtask;
  if (s == "random") return GroupingMode::Random;
  if (s == "singleton") return GroupingMode::Singleton;
  throw Error(ErrorKind::Config, "unknown grouping '" + s + "'");
}

std::vector<std::vector<int>> make_groups(const GridTask& task, GroupingMode mode, int group_size, std::uint64_t seed) {
  std::vector<std::vector<int>> out;
  switch (mode) {
    case GroupingMode::Singleton:
      for (int i = 0; i < task.n_agents; ++i) out.push_back({i});
      break;
    case GroupingMode::Subtask: {
      std::map<int, std::size_t> slot;
      for (int i = 0; i < task.n_agents; ++i) {
        const int gid = task.goal_id[static_cast<std::size_t>(i)];
        auto [it, fresh] = slot.emplace(gid, out.size());
        if (fresh) out.emplace_back();
        out[it->second].push_back(i);
      }
      break;
    }
    case GroupingMode::Random: {
      if (group_size < 1 || task.n_agents % group_size != 0) {
        throw Error(ErrorKind::BadPartition, "group size " + std::to_string(group_size) + " does not divide " +
                                                 std::to_string(task.n_agents) + " agents");
      }
      std::vector<int> order(static_cast<std::size_t>(task.n_agents));
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng(seed);
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t k = 0; k < order.size(); k += static_cast<std::size_t>(group_size)) {
        std::vector<int> g(order.begin() + static_cast<std::ptrdiff_t>(k),
                           order.begin() + static_cast<std::ptrdiff_t>(k) + group_size);
        std::sort(g.begin(), g.end());
        out.push_back(std::move(g));
      }
      std::sort(out.begin(), out.end());
      break;
    }
  }
  return out;
}

BigRational rewarding_fraction(const GridTask& task) {
  using boost::multiprecision::cpp_int;
  cpp_int num = 1, den = 1;
  for (int i = 0; i < task.n_agents; ++i) {
    num *= task.goals[static_cast<std::size_t>(i)].size();
    den *= task.map.n_free();
  }
  return BigRational(num, den);
}

}  // namespace maco
