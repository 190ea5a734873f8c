#include "ceilab/learner/memory.hpp"

#include "ceilab/common/error.hpp"

namespace ceilab::learner {

StackMemory::StackMemory(IntentionId main_task) {
  if (!main_task.is_task()) throw ProtocolError("the main intention must be a task");
  stack_.push_back(main_task);
}

std::optional<IntentionId> StackMemory::query(IntentionId action) {
  if (action.is_do()) throw ProtocolError("DO is not a memory query");
  if (action.is_done()) {
    if (stack_.empty()) throw ProtocolError("DONE on an empty stack");
    stack_.pop_back();
  } else {
    stack_.push_back(action);
  }
  if (stack_.empty()) return std::nullopt;
  return stack_.back();
}

IntentionId StackMemory::top() const {
  if (stack_.empty()) throw ProtocolError("top of an empty stack");
  return stack_.back();
}

std::optional<IntentionId> memory_query(StackMemory& memory, IntentionId action) { return memory.query(action); }

}  // namespace ceilab::learner
