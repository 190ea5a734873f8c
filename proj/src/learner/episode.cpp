#include "ceilab/learner/episode.hpp"

#include <algorithm>

#include "ceilab/common/error.hpp"
#include "ceilab/learner/memory.hpp"

namespace ceilab::learner {

using world::PrimitiveAction;

std::set<IntentionId> teacher_valid_set(tasks::Planner& planner, const world::WorldState& state, IntentionId current,
                                        const world::WorldState& baseline) {
  try {
    return planner.valid_next_intentions(state, current, baseline);
  } catch (const UnreachableError&) {
    return {tasks::kDone};
  }
}

std::shared_ptr<const PrimitiveTrace> concatenate(const std::vector<std::shared_ptr<const PrimitiveTrace>>& pieces) {
  auto out = std::make_shared<PrimitiveTrace>();
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    const auto& piece = *pieces[p];
    for (std::size_t k = 0; k < piece.actions.size(); ++k) {
      const bool last_of_all = p + 1 == pieces.size() && k + 1 == piece.actions.size();
      if (piece.actions[k] == PrimitiveAction::Terminate && !last_of_all) continue;
      out->features.push_back(piece.features[k]);
      out->actions.push_back(piece.actions[k]);
    }
  }
  return out;
}

std::shared_ptr<const PrimitiveTrace> erase_loops(const comms::Execution& exec, const PrimitiveTrace& trace) {
  if (exec.steps.size() != trace.actions.size()) throw ProtocolError("trace does not match its execution");
  auto same = [](const world::WorldState& a, const world::WorldState& b) {
    return a.agent == b.agent && a.inventory == b.inventory && a.alive == b.alive;
  };
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < exec.steps.size(); ++k) {
    const auto& s = exec.steps[k].state;
    auto it = std::find_if(kept.begin(), kept.end(), [&](std::size_t j) { return same(exec.steps[j].state, s); });
    kept.erase(it, kept.end());
    kept.push_back(k);
  }
  auto out = std::make_shared<PrimitiveTrace>();
  for (std::size_t k : kept) {
    out->features.push_back(trace.features[k]);
    out->actions.push_back(trace.actions[k]);
  }
  return out;
}

namespace {

struct Frame {
  world::WorldState baseline;
  std::vector<std::shared_ptr<const PrimitiveTrace>> pieces;
};

comms::Execution scripted_execution(const Agent& agent, const world::WorldState& start, IntentionId intention,
                                    const PolicyHooks& hooks, PrimitiveTrace* trace) {
  comms::Execution exec;
  world::WorldState state = start;
  const int l_max = agent.hyperparams().l_max;
  for (int l = 1;; ++l) {
    PrimitiveAction a = l >= l_max ? PrimitiveAction::Terminate : hooks.primitive(state, intention, l);
    exec.steps.push_back({state, a});
    if (trace) {
      trace->features.push_back(agent.encode(state));
      trace->actions.push_back(a);
    }
    if (a == PrimitiveAction::Terminate) break;
    world::apply(state, a, agent.graph().rules());
  }
  return exec;
}

}  // namespace

EpisodeTrace run_episode(Agent& agent, tasks::Planner& planner, comms::Teacher& teacher, comms::CostLedger& ledger,
                         std::shared_ptr<const world::Layout> layout, IntentionId main_task,
                         const EpisodeOptions& options) {
  const auto& graph = agent.graph();
  const auto& hp = agent.hyperparams();
  EpisodeTrace trace;
  trace.main_task = main_task;
  world::WorldState state = world::initial_state(std::move(layout), graph.rules());
  trace.initial = state;
  trace.uttered.push_back(main_task);

  StackMemory memory(main_task);
  std::vector<Frame> frames{{state, {}}};
  auto features = agent.encode(state);
  const bool use_hooks_intention = options.hooks && options.hooks->intention;
  const bool use_hooks_primitive = options.hooks && options.hooks->primitive;

  for (int t = 1; !memory.empty(); ++t) {
    if (t > hp.max_macro_steps || ledger.request_count() >= options.request_limit) {
      trace.truncated = true;
      break;
    }
    const IntentionId current = memory.top();
    const IntentionId u = use_hooks_intention ? options.hooks->intention(state, current, t)
                                              : agent.select_intention(*features, current, options.epsilon, agent.rng());
    const auto valid = teacher_valid_set(planner, state, current, frames.back().baseline);

    MacroStep step;
    step.t = t;
    step.intention = current;
    step.action = u;
    if (options.record_steps) {
      step.state = state;
      step.valid = valid;
      step.stack_before = memory.contents();
    }

    Transition tr;
    tr.obs = features;
    tr.head = Head::Intention;
    tr.slot = agent.slot_of(current);
    tr.action = agent.column_of(u);

    bool pop_confirmed = false;
    bool popped = false;
    if (!u.is_do()) {
      const comms::Utterance utt = comms::Verbal{u};
      const comms::Feedback fb = teacher.respond({valid, utt, current, state});
      const auto& ins = std::get<comms::Instructive>(fb);
      step.cost_micro = ledger.micro_cost(fb);
      ledger.charge(fb);
      step.feedback = fb;
      tr.label = agent.column_of(ins.correct);
      if (u.is_task()) {
        trace.uttered.push_back(u);
        frames.push_back({state, {}});
      } else {
        popped = true;
        pop_confirmed = ins.was_learner_correct;
      }
      memory.query(u);
      tr.next_obs = features;
    } else {
      auto exec_trace = std::make_shared<PrimitiveTrace>();
      const comms::Execution exec =
          use_hooks_primitive ? scripted_execution(agent, state, current, *options.hooks, exec_trace.get())
                              : agent.execute(state, current, options.epsilon, agent.rng(), exec_trace.get());
      const comms::Utterance utt = comms::Execute{&exec};
      const comms::Feedback fb = teacher.respond({valid, utt, current, state});
      const double score = std::get<comms::Evaluative>(fb).score;
      step.cost_micro = ledger.micro_cost(fb);
      ledger.charge(fb);
      step.feedback = fb;
      step.execution_length = exec.steps.size();
      tr.score = score;
      if (score > 0.0) {
        auto piece = erase_loops(exec, *exec_trace);
        tr.imitations.push_back({tr.slot, piece, score});
        if (score >= 1.0) {
          for (auto& frame : frames) frame.pieces.push_back(piece);
        }
      }
      state = exec.end();
      features = agent.encode(state);
      tr.next_obs = features;
      popped = true;
      pop_confirmed = score >= 1.0;
      memory.query(tasks::kDone);
    }

    if (popped) {
      Frame frame = std::move(frames.back());
      frames.pop_back();
      const bool own_single = u.is_do() && frame.pieces.size() == 1;
      if (hp.span_imitation && pop_confirmed && !frame.pieces.empty() && !own_single) {
        tr.imitations.push_back({tr.slot, concatenate(frame.pieces), 1.0});
      }
    }

    tr.reward = -static_cast<double>(step.cost_micro) / comms::CostLedger::kMicro;
    tr.terminal = memory.empty();
    tr.next_slot = memory.empty() ? 0 : agent.slot_of(memory.top());
    trace.cost_micro += step.cost_micro;
    ++trace.requests;
    if (options.store_transitions) {
      agent.replay().push(std::move(tr));
      ++trace.new_transitions;
    }
    if (options.record_steps) {
      step.stack_after = memory.contents();
      step.next_state = state;
    }
    trace.steps.push_back(std::move(step));
  }
  trace.final_state = state;
  trace.total_reward = -static_cast<double>(trace.cost_micro) / comms::CostLedger::kMicro;
  trace.success = world::is_task_satisfied(trace.initial, state, main_task.task_index(), graph.rules());
  return trace;
}

EvalResult run_teacherless(const Agent& agent, std::shared_ptr<const world::Layout> layout, IntentionId main_task,
                           const PolicyHooks* hooks) {
  const auto& graph = agent.graph();
  EvalResult result;
  world::WorldState state = world::initial_state(std::move(layout), graph.rules());
  const world::WorldState initial = state;
  StackMemory memory(main_task);
  Rng unused(0);
  for (int t = 1; !memory.empty(); ++t) {
    if (t > agent.hyperparams().max_macro_steps) {
      result.truncated = true;
      break;
    }
    const IntentionId current = memory.top();
    const IntentionId u = hooks && hooks->intention ? hooks->intention(state, current, t)
                                                    : agent.select_intention(*agent.encode(state), current, 0.0, unused);
    ++result.macro_steps;
    if (!u.is_do()) {
      memory.query(u);
      continue;
    }
    const comms::Execution exec = hooks && hooks->primitive ? scripted_execution(agent, state, current, *hooks, nullptr)
                                                            : agent.execute(state, current, 0.0, unused);
    result.primitive_steps += exec.steps.size();
    state = exec.end();
    memory.query(tasks::kDone);
  }
  result.success = world::is_task_satisfied(initial, state, main_task.task_index(), graph.rules());
  return result;
}

EvalResult run_direct(const Agent& agent, std::shared_ptr<const world::Layout> layout, IntentionId main_task,
                      const PolicyHooks* hooks) {
  const auto& graph = agent.graph();
  EvalResult result;
  const world::WorldState initial = world::initial_state(std::move(layout), graph.rules());
  Rng unused(0);
  const comms::Execution exec = hooks && hooks->primitive ? scripted_execution(agent, initial, main_task, *hooks, nullptr)
                                                          : agent.execute(initial, main_task, 0.0, unused);
  result.macro_steps = 1;
  result.primitive_steps = exec.steps.size();
  result.success = world::is_task_satisfied(initial, exec.end(), main_task.task_index(), graph.rules());
  return result;
}

}  // namespace ceilab::learner
