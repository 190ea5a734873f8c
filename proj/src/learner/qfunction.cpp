#include "ceilab/learner/qfunction.hpp"

#include "ceilab/common/hash.hpp"
#include "ceilab/craftworld/world.hpp"

namespace ceilab::learner {

int QFunction::intern(const std::string& task_id) {
  auto [it, inserted] = slots_.try_emplace(task_id, static_cast<int>(vocabulary_.size()));
  if (inserted) vocabulary_.push_back(task_id);
  return it->second;
}

std::optional<int> QFunction::find_slot(const std::string& task_id) const {
  auto it = slots_.find(task_id);
  if (it == slots_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t QFunction::row_key(std::uint64_t feature, int slot, Head head) {
  return hash_combine(feature, (static_cast<std::uint64_t>(static_cast<std::uint32_t>(slot)) << 8) |
                                   static_cast<std::uint64_t>(head));
}

std::vector<double>& QFunction::row(std::uint64_t key, Head head) {
  auto& r = rows_[key];
  const auto width = head == Head::Primitive
                         ? static_cast<std::size_t>(world::kPrimitiveActionCount)
                         : static_cast<std::size_t>(task_column(static_cast<int>(vocabulary_.size())));
  if (r.size() < width) r.resize(width, 0.0);
  return r;
}

double QFunction::value(const FeatureVec& f, int slot, Head head, int column) const {
  double q = 0.0;
  for (const auto& feat : f) {
    auto it = rows_.find(row_key(feat.key, slot, head));
    if (it == rows_.end() || static_cast<std::size_t>(column) >= it->second.size()) continue;
    q += feat.value * it->second[static_cast<std::size_t>(column)];
  }
  return q;
}

void QFunction::values(const FeatureVec& f, int slot, Head head, std::span<const int> columns,
                       std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& feat : f) {
    auto it = rows_.find(row_key(feat.key, slot, head));
    if (it == rows_.end()) continue;
    const auto& r = it->second;
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const auto c = static_cast<std::size_t>(columns[k]);
      if (c < r.size()) out[k] += feat.value * r[c];
    }
  }
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return best;
}

}  // namespace ceilab::learner
