#pragma once

#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "ceilab/craftworld/world.hpp"
#include "ceilab/taskgraph/abstraction.hpp"
#include "ceilab/taskgraph/task_graph.hpp"

namespace fixtures {

using namespace ceilab;

inline const tasks::TaskGraph& desk() {
  static const tasks::TaskGraph g = tasks::load_graph_file(tasks::bundled_graph_path("desk"));
  return g;
}

inline const tasks::TaskGraph& minecraft() {
  static const tasks::TaskGraph g = tasks::load_graph_file(tasks::bundled_graph_path("minecraft"));
  return g;
}

inline tasks::IntentionId task(const tasks::TaskGraph& g, const char* id) {
  return tasks::IntentionId::task(g.index_of(id));
}

struct Placed {
  std::string kind;
  int x;
  int y;
};

/// Layout from terrain rows ('.', '#', '~') and an entity list.
inline std::shared_ptr<const world::Layout> make_layout(const tasks::TaskGraph& g, std::vector<std::string> rows,
                                                        const std::vector<Placed>& entities, world::Cell agent) {
  nlohmann::json j;
  j["width"] = rows.front().size();
  j["height"] = rows.size();
  j["agent"] = {agent.x, agent.y};
  j["terrain"] = rows;
  j["entities"] = nlohmann::json::array();
  for (const auto& e : entities) j["entities"].push_back({{"kind", e.kind}, {"x", e.x}, {"y", e.y}});
  return std::make_shared<const world::Layout>(world::layout_from_json(j, g.rules()));
}

/// Hand-placed 6x6 desk layout with one of every entity kind.
inline std::shared_ptr<const world::Layout> desk_fixture() {
  return make_layout(desk(), {"......", "......", "......", "......", "......", "......"},
                     {{"tree", 3, 2},
                      {"stone", 0, 5},
                      {"workbench", 5, 0},
                      {"coal_ore", 5, 5},
                      {"pig", 0, 0},
                      {"furnace", 2, 4}},
                     {2, 2});
}

inline std::shared_ptr<const world::Layout> generated(const tasks::TaskGraph& g, std::uint64_t seed, int size = 6) {
  return std::make_shared<const world::Layout>(
      world::generate_layout(seed, g.default_generation(size, size), g.rules()));
}

/// Plain breadth-first search over full world states, stepping the simulator.
/// Returns the fewest primitive actions after which `task`'s output count
/// exceeds its count in `start`.
inline std::optional<int> bfs_plan_length(const world::WorldState& start, tasks::TaskIndex task,
                                          const world::Rules& rules) {
  using Key = std::tuple<int, int, std::vector<int>, std::vector<bool>>;
  auto key = [](const world::WorldState& s) { return Key{s.agent.x, s.agent.y, s.inventory, s.alive}; };
  const int out = rules.recipe(task).output;
  const int target = start.count(out) + 1;
  std::map<Key, int> dist;
  std::queue<world::WorldState> frontier;
  dist[key(start)] = 0;
  frontier.push(start);
  while (!frontier.empty()) {
    auto s = frontier.front();
    frontier.pop();
    const int d = dist[key(s)];
    for (auto a : world::kWorldActions) {
      auto n = world::step(s, a, rules);
      if (n.count(out) >= target) return d + 1;
      auto k = key(n);
      if (dist.contains(k)) continue;
      dist[k] = d + 1;
      frontier.push(std::move(n));
    }
  }
  return std::nullopt;
}

}  // namespace fixtures
