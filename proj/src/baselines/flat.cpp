#include "ceilab/baselines/flat.hpp"

#include "ceilab/learner/updates.hpp"

namespace ceilab::baselines {

using tasks::IntentionId;
using world::PrimitiveAction;

EpisodeSummary FilMethod::train_episode(std::shared_ptr<const world::Layout> layout, double progress,
                                        std::int64_t request_limit) {
  const auto& rules = graph().rules();
  const double eps = agent_.hyperparams().epsilon(progress);
  const int l_max = agent_.hyperparams().l_max;
  const int slot = agent_.slot_of(main_);
  const world::WorldState initial = world::initial_state(std::move(layout), rules);
  world::WorldState state = initial;
  EpisodeSummary summary;
  std::size_t labeled = 0;
  for (int l = 1; l < l_max; ++l) {
    if (ledger_.request_count() >= request_limit) {
      summary.truncated = true;
      break;
    }
    const auto f = agent_.encode(state);
    const PrimitiveAction label = learner::teacher_action(planner_, state, main_, initial);
    const PrimitiveAction a = agent_.select_primitive(*f, main_, eps, agent_.rng());
    ledger_.charge(comms::Instructive{main_, a == label});
    ++summary.requests;
    agent_.labeled().push({f, slot, static_cast<int>(label)});
    ++labeled;
    if (a == PrimitiveAction::Terminate) break;
    world::apply(state, a, rules);
  }
  summary.success = world::is_task_satisfied(initial, state, main_.task_index(), rules);
  labeled_updates(agent_.hyperparams().updates_for(labeled));
  return summary;
}

EvalResult FilMethod::evaluate(std::shared_ptr<const world::Layout> layout) const {
  return learner::run_direct(agent_, std::move(layout), main_);
}

EpisodeSummary FrlMethod::train_episode(std::shared_ptr<const world::Layout> layout, double progress,
                                        std::int64_t request_limit) {
  EpisodeSummary summary;
  if (ledger_.request_count() >= request_limit) {
    summary.truncated = true;
    return summary;
  }
  const double eps = agent_.hyperparams().epsilon(progress);
  const int slot = agent_.slot_of(main_);
  const world::WorldState initial = world::initial_state(std::move(layout), graph().rules());
  learner::PrimitiveTrace trace;
  const comms::Execution exec = agent_.execute(initial, main_, eps, agent_.rng(), &trace);

  const std::set<IntentionId> valid{tasks::kDo};
  const comms::Utterance utt = comms::Execute{&exec};
  const comms::Feedback fb = teacher_.respond({valid, utt, main_, initial});
  ledger_.charge(fb);
  summary.requests = 1;
  const double score = std::get<comms::Evaluative>(fb).score;
  summary.success = world::is_task_satisfied(initial, exec.end(), main_.task_index(), graph().rules());

  const std::size_t n = trace.actions.size();
  for (std::size_t k = 0; k < n; ++k) {
    learner::Transition t;
    t.obs = trace.features[k];
    t.head = learner::Head::Primitive;
    t.slot = slot;
    t.action = static_cast<int>(trace.actions[k]);
    t.terminal = k + 1 == n;
    t.reward = t.terminal ? score : 0.0;
    t.next_obs = t.terminal ? trace.features[k] : trace.features[k + 1];
    t.next_slot = slot;
    agent_.replay().push(std::move(t));
  }
  learner::TrainOptions train = train_options();
  train.use_margin = false;
  train.use_imitation = false;
  replay_updates(agent_.hyperparams().updates_for(n), train);
  return summary;
}

EvalResult FrlMethod::evaluate(std::shared_ptr<const world::Layout> layout) const {
  return learner::run_direct(agent_, std::move(layout), main_);
}

}  // namespace ceilab::baselines
