#include "ceilab/baselines/hierarchical.hpp"

#include "ceilab/learner/memory.hpp"

namespace ceilab::baselines {

using world::PrimitiveAction;

EpisodeSummary HilMethod::train_episode(std::shared_ptr<const world::Layout> layout, double progress,
                                        std::int64_t request_limit) {
  const auto& rules = graph().rules();
  const auto& hp = agent_.hyperparams();
  const double eps = hp.epsilon(progress);
  EpisodeSummary summary;
  world::WorldState state = world::initial_state(std::move(layout), rules);
  const world::WorldState initial = state;
  summary.uttered.push_back(main_);
  learner::StackMemory memory(main_);
  std::vector<world::WorldState> baselines{state};
  std::size_t new_transitions = 0;
  std::size_t new_labels = 0;

  auto out_of_budget = [&] { return ledger_.request_count() >= request_limit; };
  auto finish_execution = [&](const learner::FeatureVec& f, IntentionId current, const world::WorldState& end) {
    on_executed(f, current, world::is_task_satisfied(state, end, current.task_index(), rules));
    state = end;
    memory.query(tasks::kDone);
    baselines.pop_back();
  };

  for (int t = 1; !memory.empty(); ++t) {
    if (t > hp.max_macro_steps || out_of_budget()) {
      summary.truncated = true;
      break;
    }
    const IntentionId current = memory.top();
    const auto f = agent_.encode(state);

    if (execute_directly(*f, current)) {
      const comms::Execution exec = agent_.execute(state, current, eps, agent_.rng());
      const auto valid = learner::teacher_valid_set(planner_, state, current, baselines.back());
      const comms::Utterance utt = comms::Execute{&exec};
      ledger_.charge(teacher_.respond({valid, utt, current, state}));
      ++summary.requests;
      finish_execution(*f, current, exec.end());
      continue;
    }

    auto valid = learner::teacher_valid_set(planner_, state, current, baselines.back());
    if (valid.size() > 1) valid.erase(tasks::kDo);
    const IntentionId u = agent_.select_intention(*f, current, eps, agent_.rng());
    comms::Instructive fb;
    if (u.is_do()) {
      fb = valid.contains(tasks::kDo) ? comms::Instructive{tasks::kDo, true}
                                      : comms::Instructive{teacher_.correct(valid, u), false};
    } else {
      const comms::Utterance utt = comms::Verbal{u};
      fb = std::get<comms::Instructive>(teacher_.respond({valid, utt, current, state}));
    }
    ledger_.charge(fb);
    ++summary.requests;

    learner::Transition tr;
    tr.obs = f;
    tr.head = learner::Head::Intention;
    tr.slot = agent_.slot_of(current);
    tr.action = agent_.column_of(u);
    tr.label = agent_.column_of(fb.correct);
    tr.next_obs = f;
    agent_.replay().push(std::move(tr));
    ++new_transitions;

    if (u.is_task()) {
      summary.uttered.push_back(u);
      memory.query(u);
      baselines.push_back(state);
      continue;
    }
    if (u.is_done()) {
      memory.query(u);
      baselines.pop_back();
      continue;
    }
    if (!fb.was_learner_correct) continue;

    const int slot = agent_.slot_of(current);
    world::WorldState s = state;
    for (int l = 1; l < hp.l_max; ++l) {
      if (out_of_budget()) {
        summary.truncated = true;
        break;
      }
      const auto fs = agent_.encode(s);
      const PrimitiveAction label = learner::teacher_action(planner_, s, current, baselines.back());
      const PrimitiveAction a = agent_.select_primitive(*fs, current, eps, agent_.rng());
      ledger_.charge(comms::Instructive{current, a == label});
      ++summary.requests;
      agent_.labeled().push({fs, slot, static_cast<int>(label)});
      ++new_labels;
      if (a == PrimitiveAction::Terminate) break;
      world::apply(s, a, rules);
    }
    teacher_.observe_outcome(current, world::is_task_satisfied(state, s, current.task_index(), rules));
    if (summary.truncated) {
      state = s;
      break;
    }
    finish_execution(*f, current, s);
  }
  summary.success = world::is_task_satisfied(initial, state, main_.task_index(), rules);

  learner::TrainOptions train = train_options();
  train.use_rl = false;
  train.use_imitation = false;
  replay_updates(hp.updates_for(new_transitions), train);
  labeled_updates(hp.updates_for(new_labels));
  return summary;
}

AhilMethod::AhilMethod(const MethodContext& context, SuccessPredictor predictor)
    : HilMethod(context), predictor_(std::move(predictor)) {}

bool AhilMethod::execute_directly(const learner::FeatureVec& f, IntentionId current) const {
  return predictor_.should_execute(f, current);
}

void AhilMethod::on_executed(const learner::FeatureVec& f, IntentionId current, bool success) {
  predictor_.update(f, current, success);
}

void AhilMethod::load_extra_state(const nlohmann::json& j) {
  if (!j.is_null()) predictor_ = SuccessPredictor::from_json(j);
}

EvalResult AhilMethod::evaluate(std::shared_ptr<const world::Layout> layout) const {
  learner::PolicyHooks hooks;
  hooks.intention = [this](const world::WorldState& s, IntentionId current, int) {
    const auto f = agent_.encode(s);
    if (predictor_.should_execute(*f, current)) return tasks::kDo;
    Rng unused(0);
    return agent_.select_intention(*f, current, 0.0, unused);
  };
  return learner::run_teacherless(agent_, std::move(layout), main_, &hooks);
}

}  // namespace ceilab::baselines
