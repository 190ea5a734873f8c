#include "ceilab/learner/method.hpp"

#include "ceilab/common/error.hpp"
#include "ceilab/learner/updates.hpp"

namespace ceilab::learner {

namespace {

MethodContext checked(const MethodContext& context) {
  if (!context.graph || !context.channels) throw ConfigError("method context needs a graph and a channel map");
  if (!context.main_task.is_task()) throw ConfigError("main task must be a task intention");
  return context;
}

}  // namespace

Method::Method(const MethodContext& context)
    : context_(checked(context)),
      agent_(context.backend, context.hyperparams, derive_seed(context.seed, 1)),
      planner_(*context.graph),
      teacher_(context.teacher, *context.graph, context.levels, derive_seed(context.seed, 2)),
      ledger_(context.costs),
      main_(context.main_task) {
  agent_.bind(*context_.graph, *context_.channels);
}

EvalResult Method::evaluate(std::shared_ptr<const world::Layout> layout) const {
  return run_teacherless(agent_, std::move(layout), main_);
}

TrainOptions Method::train_options() const {
  TrainOptions o;
  o.gamma = agent_.hyperparams().gamma;
  o.lambda = agent_.hyperparams().lambda;
  o.imitation_lambda = agent_.hyperparams().imitation_lambda;
  o.lr = agent_.lr();
  return o;
}

void Method::replay_updates(int count, const TrainOptions& options) {
  const auto batch_size = static_cast<std::size_t>(agent_.hyperparams().batch_size);
  for (int k = 0; k < count; ++k) {
    const auto batch = agent_.replay().sample(batch_size, agent_.rng());
    train_step(agent_.q(), batch, agent_.intention_columns(), options);
  }
}

void Method::labeled_updates(int count) {
  const auto batch_size = static_cast<std::size_t>(agent_.hyperparams().batch_size);
  for (int k = 0; k < count; ++k) {
    const auto batch = agent_.labeled().sample(batch_size, agent_.rng());
    train_labeled(agent_.q(), batch, agent_.hyperparams().imitation_lambda, agent_.lr());
  }
}

CeilMethod::CeilMethod(const MethodContext& context, bool minimize_jcom)
    : Method(context), minimize_jcom_(minimize_jcom) {}

EpisodeSummary CeilMethod::train_episode(std::shared_ptr<const world::Layout> layout, double progress,
                                         std::int64_t request_limit) {
  EpisodeOptions options;
  options.epsilon = agent_.hyperparams().epsilon(progress);
  options.request_limit = request_limit;
  options.record_steps = record_steps_;
  comms::Teacher& teacher = external_teacher_ ? *external_teacher_ : static_cast<comms::Teacher&>(teacher_);
  last_trace_ = run_episode(agent_, planner_, teacher, ledger_, std::move(layout), main_, options);

  TrainOptions train = train_options();
  train.use_rl = minimize_jcom_;
  replay_updates(agent_.hyperparams().updates_for(last_trace_.new_transitions), train);
  return {last_trace_.requests, last_trace_.success, last_trace_.truncated, last_trace_.uttered};
}

world::PrimitiveAction teacher_action(tasks::Planner& planner, const world::WorldState& state, IntentionId task,
                                      const world::WorldState& baseline) {
  try {
    const auto plan = planner.plan(state, task.task_index(), baseline);
    return plan.actions.empty() ? world::PrimitiveAction::Terminate : plan.actions.front();
  } catch (const UnreachableError&) {
    return world::PrimitiveAction::Terminate;
  }
}

}  // namespace ceilab::learner
