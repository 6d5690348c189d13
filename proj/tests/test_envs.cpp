#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "maco/envs.hpp"

using namespace maco;

namespace {

GridMap parse(const std::string& text) {
  std::istringstream in(text);
  return GridMap::parse(in);
}

std::string map_path(const std::string& file) {
  return (std::filesystem::path(MACO_SOURCE_DIR) / "maps" / file).string();
}

std::vector<std::string> raw_rows(const std::string& file) {
  std::ifstream in(map_path(file));
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != ';') rows.push_back(line);
  return rows;
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

const char* kRoom =
    "######\n"
    "#ab..#\n"
    "#....#\n"
    "#..00#\n"
    "######\n";

}  // namespace

TEST_CASE("map parsing") {
  const auto m = parse(std::string("; comment\n") + kRoom);
  CHECK(m.width() == 6);
  CHECK(m.height() == 5);
  CHECK(m.n_free() == 12);
  CHECK(m.starts() == std::vector<int>{0, 1});
  CHECK(m.goal_areas().at(0) == std::vector<int>{10, 11});
  CHECK(m.cell_index(0, 0) == -1);
  CHECK(m.cell_index(1, 1) == 0);
  CHECK(m.coords(5) == std::pair{2, 2});

  CHECK(kind_of([] { parse("###\n#.#\n##\n"); }) == ErrorKind::BadMap);
  CHECK(kind_of([] { parse("####\n#.X#\n####\n"); }) == ErrorKind::BadMap);
  CHECK(kind_of([] { parse("####\n#ac#\n####\n"); }) == ErrorKind::BadMap);
  CHECK(kind_of([] { parse("; only comments\n"); }) == ErrorKind::BadMap);
  CHECK(kind_of([] { GridMap::load("/nonexistent/map.txt"); }) == ErrorKind::Io);
}

TEST_CASE("moves stop at walls") {
  const auto m = parse(kRoom);
  CHECK(m.move(0, kUp) == 0);
  CHECK(m.move(0, kLeft) == 0);
  CHECK(m.move(0, kRight) == 1);
  CHECK(m.move(0, kDown) == 4);
  CHECK(m.move(0, kStay) == 0);
  CHECK_THROWS_AS(m.move(0, 7), Error);
}

TEST_CASE("four-room graph degrees match a flood fill of the raw text") {
  for (const char* file : {"fourroom_2agent.txt", "fourroom_8agent.txt", "fourroom_3x2.txt"}) {
    const auto rows = raw_rows(file);
    auto free = [&](int r, int c) {
      return r >= 0 && c >= 0 && r < static_cast<int>(rows.size()) && c < static_cast<int>(rows[0].size()) &&
             rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] != '#';
    };
    std::map<int, int> expected;
    std::set<std::pair<int, int>> seen;
    std::vector<std::pair<int, int>> stack;
    for (int r = 0; r < static_cast<int>(rows.size()) && stack.empty(); ++r)
      for (int c = 0; c < static_cast<int>(rows[0].size()); ++c)
        if (free(r, c)) {
          stack.push_back({r, c});
          seen.insert({r, c});
          break;
        }
    while (!stack.empty()) {
      auto [r, c] = stack.back();
      stack.pop_back();
      int deg = 0;
      for (auto [dr, dc] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
        if (!free(r + dr, c + dc)) continue;
        ++deg;
        if (seen.insert({r + dr, c + dc}).second) stack.push_back({r + dr, c + dc});
      }
      ++expected[deg];
    }
    const auto map = GridMap::load(map_path(file));
    const auto g = adjacency_from_map(map);
    CHECK(static_cast<int>(seen.size()) == map.n_free());
    CHECK(map.n_free() == 121);
    std::map<int, int> got;
    for (int i = 0; i < g.n_nodes(); ++i) ++got[g.degree(i)];
    CHECK(got == expected);
  }
}

TEST_CASE("disconnected maps are rejected") {
  const auto m = parse("#####\n#0#a#\n#####\n");
  CHECK(kind_of([&] { adjacency_from_map(m); }) == ErrorKind::Disconnected);
}

TEST_CASE("collision resolution follows agent order") {
  const auto map = parse(kRoom);
  TaskSpec spec;
  spec.n_agents = 2;
  spec.collision = true;
  const auto task = make_task(map, spec);
  const std::vector<int> s{0, 1};

  // Agent 0 moves into agent 1's cell before agent 1 leaves: blocked.
  auto r = step(task, s, std::vector<int>{kRight, kRight}, 0);
  CHECK(r.next == std::vector<int>{0, 2});
  // Agent 1 moves first into agent 0's old cell, which is still occupied.
  r = step(task, s, std::vector<int>{kDown, kLeft}, 0);
  CHECK(r.next == std::vector<int>{4, 0});

  TaskSpec free_spec = spec;
  free_spec.collision = false;
  const auto ghost = make_task(map, free_spec);
  r = step(ghost, s, std::vector<int>{kRight, kLeft}, 0);
  CHECK(r.next == std::vector<int>{1, 0});
  r = step(ghost, s, std::vector<int>{kRight, kStay}, 0);
  CHECK(r.next == std::vector<int>{1, 1});
}

TEST_CASE("reward only on completion and episodes end at the cap") {
  const auto map = parse(kRoom);
  TaskSpec spec;
  spec.n_agents = 2;
  spec.episode_cap = 5;
  const auto task = make_task(map, spec);
  auto r = step(task, std::vector<int>{10, 7}, std::vector<int>{kStay, kDown}, 0);
  CHECK(r.completed);
  CHECK(r.done);
  CHECK(r.reward == 1.0);
  r = step(task, std::vector<int>{10, 0}, std::vector<int>{kStay, kStay}, 3);
  CHECK_FALSE(r.done);
  CHECK(r.reward == 0.0);
  r = step(task, std::vector<int>{10, 0}, std::vector<int>{kStay, kStay}, 4);
  CHECK(r.done);
  CHECK_FALSE(r.completed);
  CHECK_THROWS_AS(step(task, std::vector<int>{0}, std::vector<int>{0}, 0), Error);
}

TEST_CASE("task construction") {
  const auto map = GridMap::load(map_path("fourroom_3x2.txt"));
  TaskSpec spec;
  spec.n_agents = 6;
  const auto t = make_task(map, spec);
  CHECK(t.goal_id == std::vector<int>{0, 0, 1, 1, 2, 2});
  CHECK(t.groups.size() == 6);
  CHECK(make_groups(t, GroupingMode::Subtask) == std::vector<std::vector<int>>{{0, 1}, {2, 3}, {4, 5}});
  for (std::size_t i = 0; i < 6; ++i) CHECK(t.goals[i].size() == 4);

  TaskSpec bad = spec;
  bad.n_agents = 7;
  CHECK(kind_of([&] { make_task(map, bad); }) == ErrorKind::Config);
  bad = spec;
  bad.goal_id = {0, 0, 1, 1, 2, 9};
  CHECK(kind_of([&] { make_task(map, bad); }) == ErrorKind::Config);
}

TEST_CASE("random grouping is a seeded partition") {
  const auto map = GridMap::load(map_path("fourroom_8agent.txt"));
  TaskSpec spec;
  spec.n_agents = 8;
  const auto t = make_task(map, spec);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto g = make_groups(t, GroupingMode::Random, 2, seed);
    CHECK(g == make_groups(t, GroupingMode::Random, 2, seed));
    CHECK(g.size() == 4);
    std::vector<int> all;
    for (const auto& grp : g) {
      CHECK(grp.size() == 2);
      all.insert(all.end(), grp.begin(), grp.end());
    }
    std::sort(all.begin(), all.end());
    CHECK(all == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
  }
  CHECK(kind_of([&] { make_groups(t, GroupingMode::Random, 3, 1); }) == ErrorKind::BadPartition);
  CHECK(parse_grouping("random") == GroupingMode::Random);
  CHECK_THROWS_AS(parse_grouping("pairs"), Error);
}

TEST_CASE("rewarding fraction is exact") {
  const auto map = parse(kRoom);
  TaskSpec spec;
  spec.n_agents = 2;
  const auto t = make_task(map, spec);
  CHECK(rewarding_fraction(t) == BigRational(4, 144));
  const auto four = make_task(GridMap::load(map_path("fourroom_2agent.txt")), spec);
  CHECK(rewarding_fraction(four) == BigRational(16, 14641));
}
