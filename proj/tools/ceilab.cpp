#include <algorithm>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "ceilab/common/error.hpp"
#include "ceilab/harness/config.hpp"
#include "ceilab/harness/experiment.hpp"
#include "ceilab/harness/interactive.hpp"
#include "ceilab/harness/plot_data.hpp"
#include "ceilab/learner/checkpoint.hpp"
#include "ceilab/taskgraph/abstraction.hpp"

using namespace ceilab;
using namespace ceilab::harness;

namespace {

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("-c,--config", args.path, "Experiment config (JSON)");
  cmd->add_option("-s,--set", args.overrides, "Override a config key, e.g. --set budget=20000");
}

ExperimentConfig resolve_config(const ConfigArgs& args) {
  nlohmann::json j = args.path.empty() ? to_json(ExperimentConfig{}) : to_json(load_config(args.path));
  return config_from_json(apply_overrides(std::move(j), args.overrides));
}

ProgressFn printer(bool quiet) {
  if (quiet) return {};
  auto mutex = std::make_shared<std::mutex>();
  return [mutex](std::uint64_t seed, const RecordRow& row) {
    std::lock_guard lock(*mutex);
    fmt::print("seed {} requests {:>8} episodes {:>6} success {:.3f} cost {:.2f} group IV {:.2f}\n", seed,
               row.request_count, row.episodes, row.success_rate, row.total_cost, row.groups[3]);
    std::fflush(stdout);
  };
}

void print_threshold_summary(const std::vector<RunRecord>& records, double threshold) {
  std::vector<double> hits;
  for (const auto& r : records) {
    const auto hit = r.requests_to_reach(threshold);
    fmt::print("  seed {}: {}\n", r.seed, hit ? std::to_string(*hit) : "not reached");
    hits.push_back(hit ? static_cast<double>(*hit) : std::numeric_limits<double>::infinity());
  }
  std::sort(hits.begin(), hits.end());
  const auto n = hits.size();
  const double median = n == 0 ? 0.0 : (n % 2 ? hits[n / 2] : 0.5 * (hits[n / 2 - 1] + hits[n / 2]));
  fmt::print("  median requests to {:.0f}% success: {}\n", threshold * 100, median);
}

int run_train(const ConfigArgs& args, bool quiet) {
  const auto config = resolve_config(args);
  const auto records = run_experiment(config, printer(quiet));
  fmt::print("{} runs written to {}\n", records.size(), config.output_dir);
  print_threshold_summary(records, 0.9);
  return 0;
}

int run_eval(const ConfigArgs& args, const std::string& checkpoint, std::optional<std::uint64_t> seed) {
  const auto config = resolve_config(args);
  config.validate();
  const auto env = Environment::load(config);
  const auto s = seed.value_or(config.seeds.front());
  auto method = make_method(config, *env, s);
  const auto ckpt = learner::load_checkpoint(checkpoint_for_seed(checkpoint, s));
  learner::restore(method->agent(), ckpt);
  method->load_extra_state(ckpt.extra);
  const auto layouts = eval_layouts(config, *env, s);
  fmt::print("success rate {:.4f} over {} held-out layouts\n", evaluate(*method, layouts), layouts.size());
  return 0;
}

int run_ablate(const ConfigArgs& args, bool quiet) {
  auto config = resolve_config(args);
  const std::filesystem::path root = config.output_dir;
  for (auto kind : {MethodKind::Ceil, MethodKind::CeilNoJcom}) {
    config.method = kind;
    config.output_dir = (root / std::string(to_string(kind))).string();
    const auto records = run_experiment(config, printer(quiet));
    fmt::print("{}:\n", to_string(kind));
    print_threshold_summary(records, 0.9);
  }
  return 0;
}

int run_teach(const ConfigArgs& args, int episodes, bool no_hint, std::optional<std::uint64_t> seed) {
  const auto config = resolve_config(args);
  TeachOptions options;
  options.episodes = episodes;
  options.show_valid = !no_hint;
  options.seed = seed;
  auto run = interactive_teach(config, std::cin, std::cout, options);
  const std::filesystem::path out = config.output_dir;
  const auto ckpt = out / fmt::format("seed_{}.checkpoint.json", run.record.seed);
  std::filesystem::create_directories(out);
  learner::save_checkpoint(ckpt, run.method->agent(), run.method->name(), run.method->extra_state());
  run.record.checkpoint = ckpt.string();
  write_run_record(out, run.record);
  fmt::print("session written to {}\n", out.string());
  return 0;
}

int run_plot_data(const std::vector<std::string>& dirs, const std::string& out) {
  std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
  const auto records = load_records(paths);
  if (records.empty()) throw ConfigError("no seed_<n>.csv files found");
  for (const auto& p : emit_plot_data(records, out)) fmt::print("{}\n", p.string());
  return 0;
}

int run_validate_graph(const std::string& graph_arg, int width, int height) {
  const auto graph = tasks::load_graph_file(resolve_graph_path(graph_arg));
  const tasks::AbstractionLevels levels(graph, tasks::reference_layout(graph, width, height));
  fmt::print("{} tasks, roots:", graph.size());
  for (auto r : graph.roots()) fmt::print(" {}", graph.task(r).id);
  fmt::print("\n{:<20} {:>6} {:>6}\n", "task", "level", "group");
  for (tasks::TaskIndex t = 0; t < graph.size(); ++t) {
    fmt::print("{:<20} {:>6} {:>6}\n", graph.task(t).id, levels.level(t), tasks::to_string(tasks::level_group(graph, t)));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Communication-efficient interactive learning in a crafting gridworld"};
  app.require_subcommand(1);

  ConfigArgs train_args, eval_args, ablate_args, teach_args, describe_args;
  bool quiet = false;
  std::string checkpoint;
  std::optional<std::uint64_t> seed;
  int episodes = 1;
  bool no_hint = false;
  std::vector<std::string> plot_dirs;
  std::string plot_out = "plots";
  std::string graph_arg = "desk";
  int width = 6, height = 6;

  auto* train = app.add_subcommand("train", "Train every configured seed and write run records");
  add_config_options(train, train_args);
  train->add_flag("-q,--quiet", quiet, "Only print the summary");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on held-out layouts");
  add_config_options(eval, eval_args);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file; {seed} is replaced by the seed")->required();
  eval->add_option("--seed", seed, "Seed whose held-out layouts are used");

  auto* ablate = app.add_subcommand("ablate", "Train ceil and ceil_no_jcom side by side");
  add_config_options(ablate, ablate_args);
  ablate->add_flag("-q,--quiet", quiet, "Only print the summaries");

  auto* teach = app.add_subcommand("teach", "Answer the learner's feedback requests yourself");
  add_config_options(teach, teach_args);
  teach->add_option("--episodes", episodes, "Episodes to run, 0 for the whole budget");
  teach->add_flag("--no-hint", no_hint, "Do not show the valid intentions");
  teach->add_option("--seed", seed, "Seed of the learner and layouts");

  auto* plot = app.add_subcommand("plot-data", "Aggregate run records into mean and stderr curves");
  plot->add_option("dirs", plot_dirs, "Directories holding seed_<n>.csv files")->required();
  plot->add_option("-o,--out", plot_out, "Output directory");

  auto* validate = app.add_subcommand("validate-graph", "Load a task graph and print its abstraction levels");
  validate->add_option("graph", graph_arg, "Bundled graph name or path");
  validate->add_option("--width", width, "Reference layout width");
  validate->add_option("--height", height, "Reference layout height");

  auto* describe = app.add_subcommand("describe-config", "Print the resolved config with every default");
  add_config_options(describe, describe_args);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return run_train(train_args, quiet);
    if (*eval) return run_eval(eval_args, checkpoint, seed);
    if (*ablate) return run_ablate(ablate_args, quiet);
    if (*teach) return run_teach(teach_args, episodes, no_hint, seed);
    if (*plot) return run_plot_data(plot_dirs, plot_out);
    if (*validate) return run_validate_graph(graph_arg, width, height);
    if (*describe) {
      const auto config = resolve_config(describe_args);
      fmt::print("{}\n", to_json(config).dump(2));
      return 0;
    }
  } catch (const std::exception& ex) {
    fmt::print(stderr, "error: {}\n", ex.what());
    return 1;
  }
  return 0;
}
