#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ceilab/comms/cost.hpp"
#include "ceilab/comms/teacher.hpp"
#include "ceilab/learner/agent.hpp"
#include "ceilab/learner/episode.hpp"
#include "ceilab/learner/updates.hpp"
#include "ceilab/taskgraph/abstraction.hpp"
#include "ceilab/taskgraph/planner.hpp"

namespace ceilab::learner {

/// Everything a training method needs to set up one seeded run.
struct MethodContext {
  const tasks::TaskGraph* graph = nullptr;
  const world::ChannelMap* channels = nullptr;
  tasks::AbstractionLevels levels;
  comms::TeacherVariant teacher = comms::TeacherVariant::PerformanceBased;
  comms::CostSchedule costs;
  Backend backend = Backend::TabularFactored;
  Hyperparams hyperparams;
  IntentionId main_task;
  std::uint64_t seed = 0;
};

struct EpisodeSummary {
  std::int64_t requests = 0;
  bool success = false;
  bool truncated = false;
  /// Task intentions uttered, including the opening declaration when the
  /// method makes one.
  std::vector<IntentionId> uttered;
};

/// A learner together with its teacher, planner and ledger. Subclasses
/// define the episode protocol and the updates that follow each episode.
class Method {
 public:
  explicit Method(const MethodContext& context);
  virtual ~Method() = default;
  Method(const Method&) = delete;
  Method& operator=(const Method&) = delete;

  virtual std::string name() const = 0;
  /// Runs one episode on `layout` and trains on what it collected. `progress`
  /// is the spent share of the budget; the episode is cut short once the
  /// ledger holds `request_limit` requests.
  virtual EpisodeSummary train_episode(std::shared_ptr<const world::Layout> layout, double progress,
                                       std::int64_t request_limit) = 0;
  /// Teacher-free greedy run of the main task.
  virtual EvalResult evaluate(std::shared_ptr<const world::Layout> layout) const;

  /// Method-specific state stored next to the value model in checkpoints.
  virtual nlohmann::json extra_state() const { return nullptr; }
  virtual void load_extra_state(const nlohmann::json&) {}

  /// Switches the main task, e.g. when adapting to a new task.
  void set_main_task(IntentionId task) { main_ = task; }
  IntentionId main_task() const { return main_; }

  Agent& agent() { return agent_; }
  const Agent& agent() const { return agent_; }
  tasks::Planner& planner() { return planner_; }
  comms::TeacherModel& teacher() { return teacher_; }
  comms::CostLedger& ledger() { return ledger_; }
  const comms::CostLedger& ledger() const { return ledger_; }
  const tasks::TaskGraph& graph() const { return *context_.graph; }

 protected:
  /// `count` replay batches through train_step.
  void replay_updates(int count, const TrainOptions& options);
  /// `count` batches of labeled primitive steps.
  void labeled_updates(int count);
  TrainOptions train_options() const;

  MethodContext context_;
  Agent agent_;
  tasks::Planner planner_;
  comms::TeacherModel teacher_;
  comms::CostLedger ledger_;
  IntentionId main_;
};

/// Communication-efficient interactive learning. With `minimize_jcom` off,
/// the temporal-difference term is dropped from training.
class CeilMethod final : public Method {
 public:
  CeilMethod(const MethodContext& context, bool minimize_jcom = true);

  std::string name() const override { return minimize_jcom_ ? "ceil" : "ceil_no_jcom"; }
  EpisodeSummary train_episode(std::shared_ptr<const world::Layout> layout, double progress,
                               std::int64_t request_limit) override;

  /// Feedback comes from `teacher` instead of the simulated one while set.
  void set_teacher(comms::Teacher* teacher) { external_teacher_ = teacher; }
  /// Keep every macro step of the next episodes in last_trace().
  void set_record_steps(bool on) { record_steps_ = on; }
  const EpisodeTrace& last_trace() const { return last_trace_; }

 private:
  bool minimize_jcom_;
  comms::Teacher* external_teacher_ = nullptr;
  bool record_steps_ = false;
  EpisodeTrace last_trace_;
};

/// Planner label for the next primitive step of `task`: the first action of
/// an optimal plan, or Terminate once the task is done (or cannot be done).
world::PrimitiveAction teacher_action(tasks::Planner& planner, const world::WorldState& state, IntentionId task,
                                      const world::WorldState& baseline);

}  // namespace ceilab::learner
