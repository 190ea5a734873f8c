#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "ceilab/common/random.hpp"
#include "ceilab/comms/teacher.hpp"
#include "ceilab/craftworld/world.hpp"
#include "ceilab/learner/features.hpp"
#include "ceilab/learner/qfunction.hpp"
#include "ceilab/learner/replay.hpp"
#include "ceilab/taskgraph/task_graph.hpp"

namespace ceilab::learner {

struct Hyperparams {
  double gamma = 0.95;
  /// Margin of the hinge on intention labels.
  double lambda = 0.1;
  /// Margin of the hinge on primitive-action labels and imitated steps.
  double imitation_lambda = 1.0;
  /// Unset means the backend default (0.1 tabular, 5e-5 linear).
  std::optional<double> lr;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_fraction = 0.5;  // share of the budget over which epsilon decays
  int l_max = 100;
  std::size_t buffer_capacity = 100'000;
  int batch_size = 64;
  /// Sampled examples per newly collected one; sets the updates per episode.
  double replay_ratio = 8.0;
  int max_macro_steps = 100;
  /// Imitate the concatenated sub-executions of an intention once the
  /// teacher has confirmed it complete.
  bool span_imitation = true;

  double effective_lr(Backend backend) const;
  /// Epsilon after `progress` (0..1) of the budget.
  double epsilon(double progress) const;
  /// Number of batches to train on after collecting `new_items` examples.
  int updates_for(std::size_t new_items) const;
  void validate() const;
  bool operator==(const Hyperparams&) const = default;
};

nlohmann::json to_json(const Hyperparams& hp);
/// Starts from `base` and overrides the keys present; rejects unknown keys.
Hyperparams hyperparams_from_json(const nlohmann::json& j, Hyperparams base = {});

/// Picks argmax over `values` with probability 1 - eps, otherwise a uniform
/// index. Does not touch the rng when eps is 0.
std::size_t epsilon_greedy(std::span<const double> values, double eps, Rng& rng);

/// Value model, featurizer and replay memory of a learner, bound to one task
/// graph at a time.
class Agent {
 public:
  Agent(Backend backend, Hyperparams hp, std::uint64_t seed);

  /// Binds to a graph, adding unseen task ids to the vocabulary.
  void bind(const tasks::TaskGraph& graph, const world::ChannelMap& channels);
  /// Recomputes the bindings after the value model was replaced.
  void rebind();
  const tasks::TaskGraph& graph() const { return *graph_; }

  /// Intention-head action set: tasks in graph order, then DO, then DONE.
  const std::vector<tasks::IntentionId>& intention_actions() const { return actions_; }
  std::span<const int> intention_columns() const { return columns_; }
  int column_of(tasks::IntentionId u) const;
  int slot_of(tasks::IntentionId task) const;

  std::shared_ptr<const FeatureVec> encode(const world::WorldState& state) const;

  tasks::IntentionId select_intention(const FeatureVec& f, tasks::IntentionId current, double eps, Rng& rng) const;
  world::PrimitiveAction select_primitive(const FeatureVec& f, tasks::IntentionId current, double eps, Rng& rng) const;

  /// Runs the primitive head until it picks Terminate or the trajectory
  /// reaches l_max entries (the last one is then a forced Terminate).
  comms::Execution execute(const world::WorldState& start, tasks::IntentionId intention, double eps, Rng& rng,
                           PrimitiveTrace* trace = nullptr) const;

  QFunction& q() { return q_; }
  const QFunction& q() const { return q_; }
  const Hyperparams& hyperparams() const { return hp_; }
  Hyperparams& hyperparams() { return hp_; }
  double lr() const { return hp_.effective_lr(q_.backend()); }
  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }
  ReplayBuffer& replay() { return replay_; }
  Ring<LabeledStep>& labeled() { return labeled_; }

 private:
  Hyperparams hp_;
  QFunction q_;
  Rng rng_;
  ReplayBuffer replay_;
  Ring<LabeledStep> labeled_;
  const tasks::TaskGraph* graph_ = nullptr;
  const world::ChannelMap* channels_ = nullptr;
  std::unique_ptr<Featurizer> featurizer_;
  std::vector<tasks::IntentionId> actions_;
  std::vector<int> columns_;
  std::vector<int> slots_;  // per task index
};

}  // namespace ceilab::learner
