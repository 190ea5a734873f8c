#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "ceilab/comms/cost.hpp"
#include "ceilab/comms/teacher.hpp"
#include "ceilab/learner/agent.hpp"
#include "ceilab/taskgraph/planner.hpp"

namespace ceilab::learner {

using tasks::IntentionId;

/// Replacement policies for scripted runs and oracles.
struct PolicyHooks {
  std::function<IntentionId(const world::WorldState&, IntentionId current, int t)> intention;
  std::function<world::PrimitiveAction(const world::WorldState&, IntentionId current, int step)> primitive;
};

struct MacroStep {
  int t = 0;
  world::WorldState state;
  IntentionId intention;
  IntentionId action;
  comms::Feedback feedback;
  std::int64_t cost_micro = 0;
  std::set<IntentionId> valid;
  std::vector<IntentionId> stack_before;
  std::vector<IntentionId> stack_after;
  world::WorldState next_state;
  std::size_t execution_length = 0;
};

struct EpisodeTrace {
  IntentionId main_task;
  world::WorldState initial;
  world::WorldState final_state;
  std::vector<MacroStep> steps;
  /// Opening declaration of the main task, then every verbal task utterance.
  std::vector<IntentionId> uttered;
  bool truncated = false;
  bool success = false;
  std::int64_t cost_micro = 0;
  std::int64_t requests = 0;
  double total_reward = 0.0;
  std::size_t new_transitions = 0;
};

struct EpisodeOptions {
  double epsilon = 0.0;
  /// The episode stops (truncated) once the ledger reaches this many requests.
  std::int64_t request_limit = std::numeric_limits<std::int64_t>::max();
  bool record_steps = true;
  bool store_transitions = true;
  const PolicyHooks* hooks = nullptr;
};

/// One training episode of the intention protocol: verbal utterances get
/// instructive feedback and move the stack, DO executes the current
/// intention, gets scored and pops it.
EpisodeTrace run_episode(Agent& agent, tasks::Planner& planner, comms::Teacher& teacher, comms::CostLedger& ledger,
                         std::shared_ptr<const world::Layout> layout, IntentionId main_task,
                         const EpisodeOptions& options);

/// Valid set the teacher works from; {DONE} when the intention cannot be completed.
std::set<IntentionId> teacher_valid_set(tasks::Planner& planner, const world::WorldState& state, IntentionId current,
                                        const world::WorldState& baseline);

struct EvalResult {
  bool success = false;
  bool truncated = false;
  int macro_steps = 0;
  std::size_t primitive_steps = 0;
};

/// The agent's greedy policy with no teacher: it still decomposes with its
/// stack and executes on DO, but nobody answers.
EvalResult run_teacherless(const Agent& agent, std::shared_ptr<const world::Layout> layout, IntentionId main_task,
                           const PolicyHooks* hooks = nullptr);

/// Executes `intention` with the primitive head only.
EvalResult run_direct(const Agent& agent, std::shared_ptr<const world::Layout> layout, IntentionId main_task,
                      const PolicyHooks* hooks = nullptr);

/// Drops every segment of `trace` that returns to an earlier state of `exec`,
/// keeping the final Terminate. `trace` must be aligned with `exec.steps`.
std::shared_ptr<const PrimitiveTrace> erase_loops(const comms::Execution& exec, const PrimitiveTrace& trace);

std::shared_ptr<const PrimitiveTrace> concatenate(const std::vector<std::shared_ptr<const PrimitiveTrace>>& pieces);

}  // namespace ceilab::learner
