#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ceilab/baselines/success_predictor.hpp"
#include "ceilab/comms/cost.hpp"
#include "ceilab/comms/teacher.hpp"
#include "ceilab/craftworld/layout.hpp"
#include "ceilab/learner/agent.hpp"

namespace ceilab::harness {

enum class MethodKind { Ceil, CeilNoJcom, Fil, Frl, Hil, Ahil };
enum class Setting { Scratch, EnvAdapt, TaskAdapt };

std::string_view to_string(MethodKind m);
MethodKind method_from_string(std::string_view s);
std::string_view to_string(Setting s);
Setting setting_from_string(std::string_view s);

struct GridConfig {
  int width = 6;
  int height = 6;
  double wall_fraction = 0.0;
  double water_fraction = 0.0;
  /// Instances per entity kind; kinds left out get the graph's demand.
  std::map<std::string, int> entity_counts;
  bool operator==(const GridConfig&) const = default;
};

struct ExperimentConfig {
  MethodKind method = MethodKind::Ceil;
  comms::TeacherVariant teacher = comms::TeacherVariant::PerformanceBased;
  /// Bundled graph name or a path to a graph file.
  std::string graph = "desk";
  std::string main_task = "BakePork";
  Setting setting = Setting::Scratch;
  std::int64_t budget = 50'000;
  GridConfig grid;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  learner::Backend backend = learner::Backend::TabularFactored;
  learner::Hyperparams hyperparams;
  comms::CostSchedule costs;
  int eval_layouts = 50;
  /// Requests between evaluations; unset means 2% of the budget.
  std::optional<std::int64_t> eval_interval;
  baselines::PredictorKind predictor = baselines::PredictorKind::RunningAverage;
  double predictor_threshold = baselines::SuccessPredictor::kDefaultThreshold;
  /// Pretrained checkpoint for the adaptation settings. A "{seed}" in the
  /// path is replaced by the run's seed.
  std::string checkpoint;
  std::string output_dir = "runs";
  /// Seeds trained at once; 0 means one per hardware thread.
  int parallel = 0;

  std::int64_t effective_eval_interval() const;
  /// Throws ConfigError when an invariant is broken.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Starts from the defaults and overrides the keys present; unknown keys are
/// rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies "dotted.key=value" overrides; the value is parsed as JSON when it
/// parses, otherwise taken as a string.
nlohmann::json apply_overrides(nlohmann::json j, const std::vector<std::string>& overrides);

/// Resolves `graph` to a file: bundled name first, then a filesystem path.
std::filesystem::path resolve_graph_path(const std::string& graph);

std::string checkpoint_for_seed(const std::string& pattern, std::uint64_t seed);

}  // namespace ceilab::harness
