#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ceilab/harness/config.hpp"
#include "ceilab/harness/histogram.hpp"
#include "ceilab/harness/methods.hpp"
#include "ceilab/harness/run_record.hpp"

namespace ceilab::harness {

using LayoutPtr = std::shared_ptr<const world::Layout>;
using Policy = std::function<learner::EvalResult(LayoutPtr)>;

/// Layout streams. Held-out layouts never share a seed with training ones,
/// and the env_adapt setting draws both from streams unused in pretraining.
LayoutPtr training_layout(const ExperimentConfig& config, const Environment& env, std::uint64_t seed,
                          std::int64_t episode);
std::vector<LayoutPtr> eval_layouts(const ExperimentConfig& config, const Environment& env, std::uint64_t seed);

/// Share of `layouts` on which `policy` completes the main task. Throws on an
/// empty list.
double evaluate(const Policy& policy, std::span<const LayoutPtr> layouts);
double evaluate(const learner::Method& method, std::span<const LayoutPtr> layouts);

/// Row with the ledger totals of `method` and the given metrics.
RecordRow snapshot_row(const learner::Method& method, std::int64_t episodes, double success,
                       const GroupHistogram& histogram);

/// Called after each evaluation row, possibly from several threads at once.
using ProgressFn = std::function<void(std::uint64_t seed, const RecordRow& row)>;

struct SeedRun {
  RunRecord record;
  std::unique_ptr<learner::Method> method;
};

/// Trains one seed until the budget is spent. For the adaptation settings the
/// checkpoint is restored first. Writes nothing.
SeedRun train_seed(const ExperimentConfig& config, const Environment& env, std::uint64_t seed,
                   const ProgressFn& progress = {});

/// Trains every seed, writing seed_<n>.csv, seed_<n>.json and the final
/// checkpoint seed_<n>.checkpoint.json to config.output_dir.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Restores `checkpoint` into `method`, checking that it was trained with
/// the same method and a compatible graph.
void load_pretrained(learner::Method& method, const std::string& checkpoint, const ExperimentConfig& config);

}  // namespace ceilab::harness
