#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "ceilab/taskgraph/abstraction.hpp"
#include "ceilab/taskgraph/task_graph.hpp"

namespace ceilab::harness {

struct GroupHistogram {
  std::array<std::int64_t, tasks::kLevelGroupCount> counts{};
  /// Fractions over groups I..IV; all zero when `empty`.
  std::array<double, tasks::kLevelGroupCount> fractions{};
  bool empty = true;

  std::int64_t total() const;
  bool operator==(const GroupHistogram&) const = default;
};

/// Share of each abstraction group among the task intentions in `window`.
/// DO and DONE are skipped.
GroupHistogram abstraction_histogram(std::span<const tasks::IntentionId> window, const tasks::TaskGraph& graph);

/// Incremental form of abstraction_histogram.
class GroupCounter {
 public:
  explicit GroupCounter(const tasks::TaskGraph& graph) : graph_(&graph) {}
  void add(tasks::IntentionId u);
  void add(std::span<const tasks::IntentionId> window);
  GroupHistogram histogram() const;
  void clear() { counts_ = {}; }

 private:
  const tasks::TaskGraph* graph_;
  std::array<std::int64_t, tasks::kLevelGroupCount> counts_{};
};

}  // namespace ceilab::harness
