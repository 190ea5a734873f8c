#pragma once

#include <optional>
#include <vector>

#include "ceilab/taskgraph/task_graph.hpp"

namespace ceilab::learner {

using tasks::IntentionId;

/// Intention stack: a task id pushes, DONE pops.
class StackMemory {
 public:
  explicit StackMemory(IntentionId main_task);

  /// Returns the new top, or nothing when the stack emptied. Throws
  /// ProtocolError for DO or for DONE on an empty stack.
  std::optional<IntentionId> query(IntentionId action);

  bool empty() const { return stack_.empty(); }
  std::size_t size() const { return stack_.size(); }
  /// Throws ProtocolError on an empty stack.
  IntentionId top() const;
  const std::vector<IntentionId>& contents() const { return stack_; }

 private:
  std::vector<IntentionId> stack_;
};

std::optional<IntentionId> memory_query(StackMemory& memory, IntentionId action);

}  // namespace ceilab::learner
