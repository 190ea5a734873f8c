#pragma once

#include <map>
#include <span>
#include <utility>

#include "ceilab/learner/qfunction.hpp"
#include "ceilab/learner/replay.hpp"

namespace ceilab::learner {

/// Collects requested changes to Q values computed from one set of
/// parameters, then applies them together.
///
/// Tabular backends: each sample's change is spread over its features so the
/// sample's own Q value moves by exactly lr * delta, and every weight takes
/// the `share`-weighted mean of the changes requested for it. Linear backend:
/// plain gradient step on the batch-mean loss, each term scaled by `share`.
class GradientStep {
 public:
  GradientStep(QFunction& q, double lr, std::size_t batch_size);

  /// `delta` is the negative loss gradient with respect to the Q value.
  void add(const FeatureVec& f, int slot, Head head, int column, double delta, double share = 1.0);
  void apply();
  bool empty() const { return entries_.empty(); }

 private:
  struct Entry {
    Head head;
    double sum = 0.0;
    double shares = 0.0;
  };
  QFunction& q_;
  double lr_;
  std::size_t batch_size_;
  std::map<std::pair<std::uint64_t, int>, Entry> entries_;
};

inline constexpr int kPrimitiveColumns[] = {0, 1, 2, 3, 4, 5};

/// Adds the hinge terms for one example; returns its loss. DO is excluded
/// from the competitors of the intention head.
double add_margin_terms(GradientStep& step, const QFunction& q, const FeatureVec& f, int slot, Head head,
                        std::span<const int> columns, int label, double lambda, double weight, double share = 1.0);

/// Squared TD error terms; returns 0.5 * squared error.
double add_td_terms(GradientStep& step, const QFunction& q, const Transition& t, std::span<const int> intention_columns,
                    double gamma);

/// Mean TD loss 0.5 (Q - y)^2 over the batch, before the step.
double update_rl(QFunction& q, std::span<const Transition* const> batch, std::span<const int> intention_columns,
                 double gamma, double lr);
/// Mean hinge loss over labeled batch elements, before the step.
double update_margin(QFunction& q, std::span<const Transition* const> batch, std::span<const int> intention_columns,
                     double lambda, double lr);
/// Hinge over the primitive head with the taken actions as labels, averaged
/// over the trace and scaled by `score`. A zero score leaves `q` untouched.
double update_self_imitation(QFunction& q, const PrimitiveTrace& trace, int slot, double score, double lambda,
                             double lr);

struct TrainOptions {
  double gamma = 0.95;
  double lambda = 1.0;
  /// Margin of the self-imitation hinge on the primitive head.
  double imitation_lambda = 1.0;
  double lr = 0.1;
  bool use_rl = true;
  bool use_margin = true;
  bool use_imitation = true;
};

/// RL, margin and self-imitation losses summed on one batch and applied as
/// a single step. Each imitated trace counts as one example, averaged over
/// its steps.
void train_step(QFunction& q, std::span<const Transition* const> batch, std::span<const int> intention_columns,
                const TrainOptions& options);

/// Hinge step on labeled primitive decisions.
void train_labeled(QFunction& q, std::span<const LabeledStep* const> batch, double lambda, double lr);

}  // namespace ceilab::learner
