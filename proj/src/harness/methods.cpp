#include "ceilab/harness/methods.hpp"

#include "ceilab/baselines/flat.hpp"
#include "ceilab/baselines/hierarchical.hpp"
#include "ceilab/common/error.hpp"

namespace ceilab::harness {

world::GenerationParams generation_params(const GridConfig& grid, const tasks::TaskGraph& graph) {
  auto params = graph.default_generation(grid.width, grid.height);
  params.wall_fraction = grid.wall_fraction;
  params.water_fraction = grid.water_fraction;
  for (const auto& [kind, count] : grid.entity_counts) params.entity_counts[kind] = count;
  return params;
}

std::shared_ptr<const Environment> Environment::load(const ExperimentConfig& config) {
  auto graph = tasks::load_graph_file(resolve_graph_path(config.graph));
  auto channels = world::ChannelMap::build(graph.rules(), config.grid.height, config.grid.width);
  auto generation = generation_params(config.grid, graph);
  tasks::AbstractionLevels levels(graph, tasks::reference_layout(graph, config.grid.width, config.grid.height));
  const auto main = graph.find(config.main_task);
  if (!main) throw ConfigError("main task '" + config.main_task + "' is not in the graph");
  return std::make_shared<const Environment>(Environment{std::move(graph), std::move(channels), std::move(generation),
                                                         std::move(levels), tasks::IntentionId::task(*main)});
}

std::unique_ptr<learner::Method> make_method(MethodKind kind, const ExperimentConfig& config, const Environment& env,
                                             std::uint64_t seed) {
  learner::MethodContext ctx;
  ctx.graph = &env.graph;
  ctx.channels = &env.channels;
  ctx.levels = env.levels;
  ctx.teacher = config.teacher;
  ctx.costs = config.costs;
  ctx.backend = config.backend;
  ctx.hyperparams = config.hyperparams;
  ctx.main_task = env.main_task;
  ctx.seed = seed;
  switch (kind) {
    case MethodKind::Ceil: return std::make_unique<learner::CeilMethod>(ctx, true);
    case MethodKind::CeilNoJcom: return std::make_unique<learner::CeilMethod>(ctx, false);
    case MethodKind::Fil: return std::make_unique<baselines::FilMethod>(ctx);
    case MethodKind::Frl: return std::make_unique<baselines::FrlMethod>(ctx);
    case MethodKind::Hil: return std::make_unique<baselines::HilMethod>(ctx);
    case MethodKind::Ahil:
      return std::make_unique<baselines::AhilMethod>(
          ctx, baselines::SuccessPredictor(config.predictor, config.predictor_threshold));
  }
  throw ConfigError("unknown method");
}

std::unique_ptr<learner::Method> make_method(const ExperimentConfig& config, const Environment& env,
                                             std::uint64_t seed) {
  return make_method(config.method, config, env, seed);
}

}  // namespace ceilab::harness
