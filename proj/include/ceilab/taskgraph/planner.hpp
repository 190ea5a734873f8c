#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "ceilab/craftworld/world.hpp"
#include "ceilab/taskgraph/task_graph.hpp"

namespace ceilab::tasks {

struct PlanResult {
  std::vector<world::PrimitiveAction> actions;
  /// Task whose recipe fires first along the plan; unset for an empty plan.
  std::optional<TaskIndex> first_event;
};

/// Optimal search over (agent cell, inventory, entity liveness) with unit
/// step cost. Among equally short plans, the one whose first recipe event has
/// the lowest task index is chosen; remaining ties go to the lowest action
/// index at each step.
///
/// A Planner memoizes results for the most recently queried layout, so an
/// instance must not be shared between threads.
class Planner {
 public:
  static constexpr std::size_t kDefaultStateLimit = 4'000'000;

  explicit Planner(const TaskGraph& graph, std::size_t state_limit = kDefaultStateLimit);

  /// Shortest plan after which the task's output count exceeds its count in
  /// `state`. Throws UnreachableError when no plan exists.
  PlanResult plan(const world::WorldState& state, TaskIndex task);
  /// Same, but returns an empty plan when the task is already satisfied
  /// between `baseline` and `state`, and otherwise targets one more output
  /// than `baseline` holds.
  PlanResult plan(const world::WorldState& state, TaskIndex task, const world::WorldState& baseline);
  std::optional<PlanResult> try_plan(const world::WorldState& state, TaskIndex task);

  /// Intentions the teacher accepts as the next utterance for `current`.
  /// Throws UnreachableError when the current task cannot be completed.
  std::set<IntentionId> valid_next_intentions(const world::WorldState& state, IntentionId current,
                                              const world::WorldState& baseline);

  const TaskGraph& graph() const { return *graph_; }
  std::size_t cache_size() const { return cache_.size(); }

 private:
  static constexpr int kMaxItems = 32;

  struct Packed {
    std::uint64_t alive = 0;
    std::uint16_t cell = 0;
    std::array<std::uint8_t, kMaxItems> inventory{};
    bool operator==(const Packed&) const = default;
  };
  struct PackedHash {
    std::size_t operator()(const Packed& p) const;
  };
  struct CacheKey {
    Packed state;
    int task = 0;
    int threshold = 0;
    bool operator==(const CacheKey&) const = default;
  };
  struct CacheKeyHash {
    std::size_t operator()(const CacheKey& k) const;
  };

  void bind_layout(const std::shared_ptr<const world::Layout>& layout);
  Packed pack(const world::WorldState& state) const;
  std::optional<PlanResult> search(const Packed& start, TaskIndex task, int threshold);
  std::optional<PlanResult> cached_search(const world::WorldState& state, TaskIndex task, int threshold);

  const TaskGraph* graph_;
  std::size_t state_limit_;
  std::shared_ptr<const world::Layout> layout_;
  std::vector<int> entity_at_;  // per cell, -1 when empty
  std::unordered_map<CacheKey, std::optional<PlanResult>, CacheKeyHash> cache_;
};

}  // namespace ceilab::tasks
