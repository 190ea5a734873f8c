#include "ceilab/harness/histogram.hpp"

namespace ceilab::harness {

std::int64_t GroupHistogram::total() const {
  std::int64_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

void GroupCounter::add(tasks::IntentionId u) {
  if (!u.is_task()) return;
  ++counts_[static_cast<std::size_t>(tasks::level_group(*graph_, u.task_index()))];
}

void GroupCounter::add(std::span<const tasks::IntentionId> window) {
  for (auto u : window) add(u);
}

GroupHistogram GroupCounter::histogram() const {
  GroupHistogram h;
  h.counts = counts_;
  const auto total = h.total();
  h.empty = total == 0;
  if (h.empty) return h;
  for (std::size_t g = 0; g < h.counts.size(); ++g) {
    h.fractions[g] = static_cast<double>(h.counts[g]) / static_cast<double>(total);
  }
  return h;
}

GroupHistogram abstraction_histogram(std::span<const tasks::IntentionId> window, const tasks::TaskGraph& graph) {
  GroupCounter counter(graph);
  counter.add(window);
  return counter.histogram();
}

}  // namespace ceilab::harness
