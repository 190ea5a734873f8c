#include "ceilab/learner/updates.hpp"

#include <limits>
#include <vector>

namespace ceilab::learner {

GradientStep::GradientStep(QFunction& q, double lr, std::size_t batch_size)
    : q_(q), lr_(lr), batch_size_(batch_size == 0 ? 1 : batch_size) {}

void GradientStep::add(const FeatureVec& f, int slot, Head head, int column, double delta, double share) {
  if (delta == 0.0 || share == 0.0) return;
  const bool normalized = normalized_steps(q_.backend());
  double norm = 0.0;
  for (const auto& feat : f) norm += feat.value * feat.value;
  if (norm == 0.0) return;
  for (const auto& feat : f) {
    auto& e = entries_[{QFunction::row_key(feat.key, slot, head), column}];
    e.head = head;
    e.sum += share * (normalized ? delta * feat.value / norm : delta * feat.value);
    e.shares += share;
  }
}

void GradientStep::apply() {
  const bool normalized = normalized_steps(q_.backend());
  for (const auto& [key, e] : entries_) {
    auto& row = q_.row(key.first, e.head);
    const auto c = static_cast<std::size_t>(key.second);
    if (row.size() <= c) row.resize(c + 1, 0.0);
    row[c] += normalized ? lr_ * e.sum / e.shares : lr_ * e.sum / static_cast<double>(batch_size_);
  }
  entries_.clear();
}

double add_margin_terms(GradientStep& step, const QFunction& q, const FeatureVec& f, int slot, Head head,
                        std::span<const int> columns, int label, double lambda, double weight, double share) {
  std::vector<double> v(columns.size());
  q.values(f, slot, head, columns, v);
  double q_label = 0.0;
  bool have_label = false;
  int best_col = -1;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] == label) {
      q_label = v[k];
      have_label = true;
      continue;
    }
    if (head == Head::Intention && columns[k] == kDoColumn) continue;
    if (v[k] > best) {
      best = v[k];
      best_col = columns[k];
    }
  }
  if (!have_label) q_label = q.value(f, slot, head, label);
  if (best_col < 0) return 0.0;
  const double loss = std::max(0.0, lambda + best - q_label);
  if (loss > 0.0 && weight != 0.0) {
    step.add(f, slot, head, label, weight, share);
    step.add(f, slot, head, best_col, -weight, share);
  }
  return weight * loss;
}

double add_td_terms(GradientStep& step, const QFunction& q, const Transition& t, std::span<const int> intention_columns,
                    double gamma) {
  double target = t.reward;
  if (!t.terminal) {
    const std::span<const int> cols = t.head == Head::Primitive ? std::span<const int>(kPrimitiveColumns) : intention_columns;
    std::vector<double> v(cols.size());
    q.values(*t.next_obs, t.next_slot, t.head, cols, v);
    target += gamma * v[argmax(v)];
  }
  const double current = q.value(*t.obs, t.slot, t.head, t.action);
  const double err = target - current;
  step.add(*t.obs, t.slot, t.head, t.action, err);
  return 0.5 * err * err;
}

double update_rl(QFunction& q, std::span<const Transition* const> batch, std::span<const int> intention_columns,
                 double gamma, double lr) {
  if (batch.empty()) return 0.0;
  GradientStep step(q, lr, batch.size());
  double loss = 0.0;
  for (const Transition* t : batch) loss += add_td_terms(step, q, *t, intention_columns, gamma);
  step.apply();
  return loss / static_cast<double>(batch.size());
}

double update_margin(QFunction& q, std::span<const Transition* const> batch, std::span<const int> intention_columns,
                     double lambda, double lr) {
  GradientStep step(q, lr, batch.size());
  double loss = 0.0;
  std::size_t n = 0;
  for (const Transition* t : batch) {
    if (!t->label) continue;
    const std::span<const int> cols = t->head == Head::Primitive ? std::span<const int>(kPrimitiveColumns) : intention_columns;
    loss += add_margin_terms(step, q, *t->obs, t->slot, t->head, cols, *t->label, lambda, 1.0);
    ++n;
  }
  step.apply();
  return n == 0 ? 0.0 : loss / static_cast<double>(n);
}

double update_self_imitation(QFunction& q, const PrimitiveTrace& trace, int slot, double score, double lambda,
                             double lr) {
  if (score == 0.0 || trace.actions.empty()) return 0.0;
  GradientStep step(q, lr, 1);
  const double share = 1.0 / static_cast<double>(trace.actions.size());
  double loss = 0.0;
  for (std::size_t k = 0; k < trace.actions.size(); ++k) {
    loss += add_margin_terms(step, q, *trace.features[k], slot, Head::Primitive, kPrimitiveColumns,
                             static_cast<int>(trace.actions[k]), lambda, score, share);
  }
  step.apply();
  return loss / static_cast<double>(trace.actions.size());
}

void train_step(QFunction& q, std::span<const Transition* const> batch, std::span<const int> intention_columns,
                const TrainOptions& options) {
  if (batch.empty()) return;
  GradientStep step(q, options.lr, batch.size());
  for (const Transition* t : batch) {
    if (options.use_rl) add_td_terms(step, q, *t, intention_columns, options.gamma);
    if (options.use_margin && t->label) {
      const std::span<const int> cols =
          t->head == Head::Primitive ? std::span<const int>(kPrimitiveColumns) : intention_columns;
      add_margin_terms(step, q, *t->obs, t->slot, t->head, cols, *t->label, options.lambda, 1.0);
    }
    if (!options.use_imitation) continue;
    for (const auto& im : t->imitations) {
      if (im.weight == 0.0 || !im.trace || im.trace->actions.empty()) continue;
      const double share = 1.0 / static_cast<double>(im.trace->actions.size());
      for (std::size_t k = 0; k < im.trace->actions.size(); ++k) {
        add_margin_terms(step, q, *im.trace->features[k], im.slot, Head::Primitive, kPrimitiveColumns,
                         static_cast<int>(im.trace->actions[k]), options.imitation_lambda, im.weight, share);
      }
    }
  }
  step.apply();
}

void train_labeled(QFunction& q, std::span<const LabeledStep* const> batch, double lambda, double lr) {
  if (batch.empty()) return;
  GradientStep step(q, lr, batch.size());
  for (const LabeledStep* s : batch) {
    add_margin_terms(step, q, *s->obs, s->slot, Head::Primitive, kPrimitiveColumns, s->label, lambda, 1.0);
  }
  step.apply();
}

}  // namespace ceilab::learner
