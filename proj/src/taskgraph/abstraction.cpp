#include "ceilab/taskgraph/abstraction.hpp"

#include "ceilab/craftworld/world.hpp"
#include "ceilab/taskgraph/planner.hpp"

namespace ceilab::tasks {

std::string_view to_string(LevelGroup g) {
  switch (g) {
    case LevelGroup::I: return "I";
    case LevelGroup::II: return "II";
    case LevelGroup::III: return "III";
    case LevelGroup::IV: return "IV";
  }
  return "?";
}

LevelGroup level_group(const TaskGraph& graph, TaskIndex task) {
  switch (graph.root_distance(task)) {
    case 0: return LevelGroup::IV;
    case 1: return LevelGroup::III;
    case 2: return LevelGroup::II;
    default: return LevelGroup::I;
  }
}

world::Layout reference_layout(const TaskGraph& graph, int width, int height, std::uint64_t seed) {
  return world::generate_layout(seed, graph.default_generation(width, height), graph.rules());
}

AbstractionLevels::AbstractionLevels(const TaskGraph& graph, const world::Layout& layout) {
  Planner planner(graph);
  const auto shared = std::make_shared<const world::Layout>(layout);
  const world::WorldState fresh = world::initial_state(shared, graph.rules());
  for (TaskIndex t = 0; t < graph.size(); ++t) {
    levels_.push_back(static_cast<int>(planner.plan(fresh, t).actions.size()));
  }
}

}  // namespace ceilab::tasks
