#include "ceilab/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <thread>

#include <fmt/core.h>

#include "ceilab/common/error.hpp"
#include "ceilab/common/random.hpp"
#include "ceilab/harness/histogram.hpp"
#include "ceilab/learner/checkpoint.hpp"

namespace ceilab::harness {

namespace {

constexpr std::uint64_t kHeldOut = 1ull << 63;

struct Streams {
  std::uint64_t train;
  std::uint64_t eval;
};

Streams streams_for(Setting setting) {
  if (setting == Setting::EnvAdapt) return {5, 6};
  return {4, 3};
}

}  // namespace

RecordRow snapshot_row(const learner::Method& method, std::int64_t episodes, double success,
                       const GroupHistogram& histogram) {
  const auto& ledger = method.ledger();
  RecordRow row;
  row.request_count = ledger.request_count();
  row.episodes = episodes;
  row.success_rate = success;
  row.correct_instructive = ledger.correct_instructive();
  row.incorrect_instructive = ledger.incorrect_instructive();
  row.evaluative = ledger.evaluative();
  row.total_cost = ledger.total();
  row.groups = histogram.fractions;
  row.histogram_empty = histogram.empty;
  return row;
}

LayoutPtr training_layout(const ExperimentConfig& config, const Environment& env, std::uint64_t seed,
                          std::int64_t episode) {
  const auto stream = streams_for(config.setting).train;
  return std::make_shared<const world::Layout>(world::generate_layout(
      derive_seed(seed, stream, static_cast<std::uint64_t>(episode)), env.generation, env.graph.rules()));
}

std::vector<LayoutPtr> eval_layouts(const ExperimentConfig& config, const Environment& env, std::uint64_t seed) {
  const auto stream = streams_for(config.setting).eval;
  std::vector<LayoutPtr> out;
  out.reserve(static_cast<std::size_t>(config.eval_layouts));
  for (int k = 0; k < config.eval_layouts; ++k) {
    out.push_back(std::make_shared<const world::Layout>(world::generate_layout(
        derive_seed(seed | kHeldOut, stream, static_cast<std::uint64_t>(k)), env.generation, env.graph.rules())));
  }
  return out;
}

double evaluate(const Policy& policy, std::span<const LayoutPtr> layouts) {
  if (layouts.empty()) throw ConfigError("evaluation needs at least one layout");
  std::size_t successes = 0;
  for (const auto& layout : layouts) successes += policy(layout).success ? 1 : 0;
  return static_cast<double>(successes) / static_cast<double>(layouts.size());
}

double evaluate(const learner::Method& method, std::span<const LayoutPtr> layouts) {
  return evaluate([&method](LayoutPtr layout) { return method.evaluate(std::move(layout)); }, layouts);
}

void load_pretrained(learner::Method& method, const std::string& checkpoint, const ExperimentConfig& config) {
  const auto ckpt = learner::load_checkpoint(checkpoint);
  if (ckpt.method != method.name()) {
    throw ConfigError(fmt::format("checkpoint {} was trained with '{}', not '{}'", checkpoint, ckpt.method,
                                  method.name()));
  }
  const auto& graph = method.graph();
  std::size_t known = 0;
  for (tasks::TaskIndex t = 0; t < graph.size(); ++t) known += ckpt.q.find_slot(graph.task(t).id) ? 1 : 0;
  if (config.setting == Setting::EnvAdapt && known != static_cast<std::size_t>(graph.size())) {
    throw ConfigError(fmt::format("checkpoint {} was trained on a different task graph", checkpoint));
  }
  if (known == 0) throw ConfigError(fmt::format("checkpoint {} shares no task with the graph", checkpoint));
  learner::restore(method.agent(), ckpt);
  method.agent().hyperparams() = config.hyperparams;
  method.load_extra_state(ckpt.extra);
}

SeedRun train_seed(const ExperimentConfig& config, const Environment& env, std::uint64_t seed,
                   const ProgressFn& progress) {
  SeedRun run;
  run.method = make_method(config, env, seed);
  auto& method = *run.method;
  if (config.setting != Setting::Scratch) load_pretrained(method, checkpoint_for_seed(config.checkpoint, seed), config);

  const auto held_out = eval_layouts(config, env, seed);
  const auto interval = config.effective_eval_interval();
  GroupCounter window(env.graph);
  std::int64_t episodes = 0;
  std::int64_t next_eval = 0;

  auto record_row = [&] {
    const auto row = snapshot_row(method, episodes, evaluate(method, held_out), window.histogram());
    window.clear();
    run.record.rows.push_back(row);
    if (progress) progress(seed, row);
  };

  while (method.ledger().request_count() < config.budget) {
    const auto requests = method.ledger().request_count();
    if (requests >= next_eval) {
      record_row();
      while (next_eval <= requests) next_eval += interval;
    }
    const double spent = static_cast<double>(requests) / static_cast<double>(config.budget);
    const auto summary = method.train_episode(training_layout(config, env, seed, episodes), spent, config.budget);
    window.add(summary.uttered);
    if (episodes == 0 && summary.truncated && method.ledger().request_count() >= config.budget) {
      throw ConfigError(fmt::format("budget {} does not cover one episode", config.budget));
    }
    ++episodes;
  }
  if (run.record.rows.empty() || run.record.rows.back().request_count < method.ledger().request_count()) {
    record_row();
  }

  run.record.method = method.name();
  run.record.seed = seed;
  run.record.config = to_json(config);
  return run;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  const auto env = Environment::load(config);
  const std::filesystem::path out_dir = config.output_dir;
  std::filesystem::create_directories(out_dir);

  std::vector<RunRecord> records(config.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto k = next++; k < config.seeds.size(); k = next++) {
      const auto seed = config.seeds[k];
      auto run = train_seed(config, *env, seed, progress);
      const auto ckpt = out_dir / fmt::format("seed_{}.checkpoint.json", seed);
      learner::save_checkpoint(ckpt, run.method->agent(), run.method->name(), run.method->extra_state());
      run.record.checkpoint = ckpt.string();
      write_run_record(out_dir, run.record);
      records[k] = std::move(run.record);
    }
  };

  const auto hw = std::max(1u, std::thread::hardware_concurrency());
  const auto threads = std::min<std::size_t>(config.parallel > 0 ? static_cast<std::size_t>(config.parallel) : hw,
                                             config.seeds.size());
  std::vector<std::future<void>> pending;
  for (std::size_t k = 0; k < threads; ++k) pending.push_back(std::async(std::launch::async, worker));
  for (auto& f : pending) f.get();
  return records;
}

}  // namespace ceilab::harness
