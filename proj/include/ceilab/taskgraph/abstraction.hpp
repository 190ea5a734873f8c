#pragma once

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "ceilab/craftworld/layout.hpp"
#include "ceilab/taskgraph/task_graph.hpp"

namespace ceilab::tasks {

enum class LevelGroup : std::uint8_t { I = 0, II = 1, III = 2, IV = 3 };
inline constexpr int kLevelGroupCount = 4;

std::string_view to_string(LevelGroup g);

/// IV at the root, III one level below, II two below, I for anything deeper.
LevelGroup level_group(const TaskGraph& graph, TaskIndex task);

inline constexpr std::uint64_t kReferenceLayoutSeed = 0x5eed;

/// Layout on which abstraction levels are measured.
world::Layout reference_layout(const TaskGraph& graph, int width = 6, int height = 6,
                               std::uint64_t seed = kReferenceLayoutSeed);

/// Optimal primitive action count per task, measured from the fresh state of
/// a reference layout.
class AbstractionLevels {
 public:
  AbstractionLevels() = default;
  /// Throws UnreachableError when a task cannot be completed on the layout.
  AbstractionLevels(const TaskGraph& graph, const world::Layout& layout);

  int level(TaskIndex t) const { return levels_.at(static_cast<std::size_t>(t)); }
  const std::vector<int>& levels() const { return levels_; }

 private:
  std::vector<int> levels_;
};

}  // namespace ceilab::tasks
