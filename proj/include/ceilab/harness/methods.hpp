#pragma once

#include <cstdint>
#include <memory>

#include "ceilab/craftworld/world.hpp"
#include "ceilab/harness/config.hpp"
#include "ceilab/learner/method.hpp"
#include "ceilab/taskgraph/abstraction.hpp"
#include "ceilab/taskgraph/task_graph.hpp"

namespace ceilab::harness {

/// Read-only pieces of an experiment that every seed shares.
struct Environment {
  tasks::TaskGraph graph;
  world::ChannelMap channels;
  world::GenerationParams generation;
  tasks::AbstractionLevels levels;
  tasks::IntentionId main_task;

  static std::shared_ptr<const Environment> load(const ExperimentConfig& config);
};

world::GenerationParams generation_params(const GridConfig& grid, const tasks::TaskGraph& graph);

std::unique_ptr<learner::Method> make_method(const ExperimentConfig& config, const Environment& env,
                                             std::uint64_t seed);
std::unique_ptr<learner::Method> make_method(MethodKind kind, const ExperimentConfig& config, const Environment& env,
                                             std::uint64_t seed);

}  // namespace ceilab::harness
