#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ceilab/learner/features.hpp"

namespace ceilab::learner {

enum class Head : std::uint8_t { Intention = 0, Primitive = 1 };

/// Intention-head columns: DO, DONE, then one per vocabulary slot.
inline constexpr int kDoColumn = 0;
inline constexpr int kDoneColumn = 1;
inline constexpr int task_column(int slot) { return 2 + slot; }

/// Q(s, u; i) as a sum of per-feature weight rows, one row per (feature key,
/// intention slot, head). Unseen rows read as zero. The intention vocabulary
/// is append-only, so values learned for existing ids survive when new ids
/// are added.
class QFunction {
 public:
  explicit QFunction(Backend backend = Backend::TabularFactored) : backend_(backend) {}

  Backend backend() const { return backend_; }

  /// Slot of a task id, adding a fresh one when unknown.
  int intern(const std::string& task_id);
  std::optional<int> find_slot(const std::string& task_id) const;
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }

  double value(const FeatureVec& f, int slot, Head head, int column) const;
  /// Values of the given columns, written to `out`.
  void values(const FeatureVec& f, int slot, Head head, std::span<const int> columns, std::span<double> out) const;

  static std::uint64_t row_key(std::uint64_t feature, int slot, Head head);
  /// Mutable weight row, created (zero-filled) on first access.
  std::vector<double>& row(std::uint64_t key, Head head);
  const std::unordered_map<std::uint64_t, std::vector<double>>& rows() const { return rows_; }
  void set_rows(std::unordered_map<std::uint64_t, std::vector<double>> rows) { rows_ = std::move(rows); }

  bool operator==(const QFunction&) const = default;

 private:
  Backend backend_;
  std::vector<std::string> vocabulary_;
  std::map<std::string, int> slots_;
  std::unordered_map<std::uint64_t, std::vector<double>> rows_;
};

/// Lowest index among the maxima.
std::size_t argmax(std::span<const double> values);

}  // namespace ceilab::learner
