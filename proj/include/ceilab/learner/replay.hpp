#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "ceilab/common/random.hpp"
#include "ceilab/craftworld/world.hpp"
#include "ceilab/learner/features.hpp"
#include "ceilab/learner/qfunction.hpp"

namespace ceilab::learner {

/// Features and actions of an execution, as seen by the learner.
struct PrimitiveTrace {
  std::vector<std::shared_ptr<const FeatureVec>> features;
  std::vector<world::PrimitiveAction> actions;
};

/// A primitive trace to imitate under intention `slot`, scaled by `weight`.
struct Imitation {
  int slot = 0;
  std::shared_ptr<const PrimitiveTrace> trace;
  double weight = 0.0;
};

struct Transition {
  std::shared_ptr<const FeatureVec> obs;
  Head head = Head::Intention;
  int slot = 0;    // intention the action was taken under
  int action = 0;  // column in `head`
  double reward = 0.0;
  std::shared_ptr<const FeatureVec> next_obs;
  int next_slot = 0;
  bool terminal = false;
  std::optional<int> label;  // correct column from instructive feedback
  std::optional<double> score;  // evaluative feedback
  std::vector<Imitation> imitations;
};

/// Bounded ring of transitions with a seeded uniform sampler.
template <class T>
class Ring {
 public:
  explicit Ring(std::size_t capacity) : capacity_(capacity) {}

  void push(T item) {
    if (capacity_ == 0) return;
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[next_] = std::move(item);
    }
    next_ = (next_ + 1) % capacity_;
  }

  /// `n` items drawn uniformly with replacement; empty when the ring is empty.
  std::vector<const T*> sample(std::size_t n, Rng& rng) const {
    std::vector<const T*> out;
    if (items_.empty()) return out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.push_back(&items_[rng.uniform_index(items_.size())]);
    return out;
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::vector<T>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<T> items_;
};

using ReplayBuffer = Ring<Transition>;

/// A labeled primitive decision (DAgger data).
struct LabeledStep {
  std::shared_ptr<const FeatureVec> obs;
  int slot = 0;
  int label = 0;
};

}  // namespace ceilab::learner
