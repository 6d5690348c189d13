#ifndef MACO_ENVS_HPP
#define MACO_ENVS_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "maco/policy_vi.hpp"
#include "maco/spectral_graph.hpp"

namespace maco {

/// Primitive moves. kStay is only issued by option execution for agents that
/// are waiting; learners never select it.
enum Move : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
inline constexpr int kNumMoves = 4;
inline constexpr int kStay = -1;

/// ASCII grid: '#' wall, '.' free, '0'-'9' goal cell of that goal id,
/// 'a'-'z' start cell of agent 0, 1, ...; lines starting with ';' are comments.
/// Free cells (including goal and start cells) are numbered row-major.
class GridMap {
 public:
  static GridMap parse(std::istream& in, const std::string& name = "<stream>");
  static GridMap load(const std::string& path);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int n_free() const noexcept { return static_cast<int>(cells_.size()); }
  const std::string& name() const noexcept { return name_; }

  /// Free-cell index of (row, col), or -1 for walls and out-of-bounds.
  int cell_index(int row, int col) const;
  std::pair<int, int> coords(int cell) const;
  /// Successor of `cell` under move `a`; walls and borders leave it in place.
  int move(int cell, int a) const;

  const std::map<int, std::vector<int>>& goal_areas() const noexcept { return goals_; }
  /// Start cell per agent letter, in agent order; empty if the map has none.
  const std::vector<int>& starts() const noexcept { return starts_; }

 private:
  std::string name_;
  int width_ = 0;
  int height_ = 0;
  std::vector<int> index_;  // height*width, -1 for walls
  std::vector<std::pair<int, int>> cells_;
  std::map<int, std::vector<int>> goals_;
  std::vector<int> starts_;
};

/// 4-neighbour adjacency over free cells. Throws Disconnected.
FactorGraph adjacency_from_map(const GridMap& map);
TransitionModel transition_model(const GridMap& map);

using JointState = std::vector<int>;

struct GridTask {
  GridMap map;
  int n_agents = 0;
  std::vector<int> starts;                 // per agent
  std::vector<int> goal_id;                // per agent
  std::vector<std::vector<int>> goals;     // per agent goal cells, ascending
  std::vector<std::vector<int>> groups;    // partition of agents
  bool collision = false;
  bool random_starts = false;
  int episode_cap = 200;
  double discount = 0.99;
  double completion_reward = 1.0;

  bool at_goal(int agent, int cell) const;
  bool completed(std::span<const int> state) const;
};

struct TaskSpec {
  int n_agents = 2;
  std::vector<int> goal_id;   // empty: goals assigned to agents in contiguous blocks
  std::vector<int> starts;    // empty: the map's start letters
  bool collision = false;
  bool random_starts = false;
  int episode_cap = 200;
  double discount = 0.99;
};

GridTask make_task(const GridMap& map, const TaskSpec& spec);

struct StepResult {
  JointState next;
  double reward = 0.0;
  bool done = false;
  bool completed = false;
};

/// One synchronous step. `steps_taken` counts steps before this one; the step
/// is terminal when the task completes or the episode cap is reached. With
/// collisions on, moves resolve in ascending agent order and a move into a
/// cell occupied at that moment is cancelled.
StepResult step(const GridTask& task, std::span<const int> state, std::span<const int> actions, int steps_taken);

enum class GroupingMode { Subtask, Random, Singleton };
GroupingMode parse_grouping(const std::string& s);

/// Partition agents into groups. Subtask groups agents sharing a goal id;
/// Random shuffles with `seed` and chunks by `group_size`.
std::vector<std::vector<int>> make_groups(const GridTask& task, GroupingMode mode, int group_size = 0,
                                          std::uint64_t seed = 0);

using BigRational = boost::rational<boost::multiprecision::cpp_int>;

/// Fraction of joint states that complete the task.
BigRational rewarding_fraction(const GridTask& task);

}  // namespace maco

#endif  // MACO_ENVS_HPP
