#include "ceilab/harness/config.hpp"

#include <fstream>

#include <fmt/core.h>

#include "ceilab/common/error.hpp"
#include "ceilab/taskgraph/task_graph.hpp"

namespace ceilab::harness {

namespace {

constexpr std::pair<MethodKind, std::string_view> kMethods[] = {
    {MethodKind::Ceil, "ceil"}, {MethodKind::CeilNoJcom, "ceil_no_jcom"}, {MethodKind::Fil, "fil"},
    {MethodKind::Frl, "frl"},   {MethodKind::Hil, "hil"},                 {MethodKind::Ahil, "ahil"}};

constexpr std::pair<Setting, std::string_view> kSettings[] = {
    {Setting::Scratch, "scratch"}, {Setting::EnvAdapt, "env_adapt"}, {Setting::TaskAdapt, "task_adapt"}};

nlohmann::json grid_to_json(const GridConfig& g) {
  return {{"width", g.width},
          {"height", g.height},
          {"wall_fraction", g.wall_fraction},
          {"water_fraction", g.water_fraction},
          {"entity_counts", g.entity_counts}};
}

GridConfig grid_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("grid must be an object");
  GridConfig g;
  for (const auto& [key, v] : j.items()) {
    if (key == "width") g.width = v.get<int>();
    else if (key == "height") g.height = v.get<int>();
    else if (key == "wall_fraction") g.wall_fraction = v.get<double>();
    else if (key == "water_fraction") g.water_fraction = v.get<double>();
    else if (key == "entity_counts") g.entity_counts = v.get<std::map<std::string, int>>();
    else throw ConfigError("unknown grid key '" + key + "'");
  }
  return g;
}

}  // namespace

std::string_view to_string(MethodKind m) {
  for (const auto& [k, s] : kMethods) {
    if (k == m) return s;
  }
  return "?";
}

MethodKind method_from_string(std::string_view s) {
  for (const auto& [k, name] : kMethods) {
    if (name == s) return k;
  }
  throw ConfigError(fmt::format("unknown method '{}' (ceil, ceil_no_jcom, fil, frl, hil, ahil)", s));
}

std::string_view to_string(Setting s) {
  for (const auto& [k, name] : kSettings) {
    if (k == s) return name;
  }
  return "?";
}

Setting setting_from_string(std::string_view s) {
  for (const auto& [k, name] : kSettings) {
    if (name == s) return k;
  }
  throw ConfigError(fmt::format("unknown setting '{}' (scratch, env_adapt, task_adapt)", s));
}

std::int64_t ExperimentConfig::effective_eval_interval() const {
  if (eval_interval) return *eval_interval;
  return std::max<std::int64_t>(1, budget / 50);
}

std::filesystem::path resolve_graph_path(const std::string& graph) {
  const auto bundled = tasks::bundled_graph_path(graph);
  if (std::filesystem::exists(bundled)) return bundled;
  if (std::filesystem::exists(graph)) return graph;
  throw ConfigError(fmt::format("task graph '{}' is neither bundled nor an existing file", graph));
}

void ExperimentConfig::validate() const {
  if (budget <= 0) throw ConfigError("budget must be positive");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (eval_layouts < 1) throw ConfigError("eval_layouts must be positive");
  if (eval_interval && *eval_interval < 1) throw ConfigError("eval_interval must be positive");
  if (grid.width < 2 || grid.height < 2) throw ConfigError("grid must be at least 2x2");
  if (parallel < 0) throw ConfigError("parallel must be non-negative");
  if (setting != Setting::Scratch && checkpoint.empty()) {
    throw ConfigError("adaptation settings need a pretrained checkpoint");
  }
  hyperparams.validate();
  const auto g = tasks::load_graph_file(resolve_graph_path(graph));
  const auto t = g.find(main_task);
  if (!t) throw ConfigError(fmt::format("main task '{}' is not in the graph", main_task));
  if (!g.is_root(*t)) throw ConfigError(fmt::format("main task '{}' is not a root of the graph", main_task));
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"method", to_string(c.method)},
          {"teacher", comms::to_string(c.teacher)},
          {"graph", c.graph},
          {"main_task", c.main_task},
          {"setting", to_string(c.setting)},
          {"budget", c.budget},
          {"grid", grid_to_json(c.grid)},
          {"seeds", c.seeds},
          {"backend", learner::to_string(c.backend)},
          {"hyperparams", learner::to_json(c.hyperparams)},
          {"costs", comms::to_json(c.costs)},
          {"eval_layouts", c.eval_layouts},
          {"eval_interval", c.eval_interval ? nlohmann::json(*c.eval_interval) : nlohmann::json(nullptr)},
          {"predictor", baselines::to_string(c.predictor)},
          {"predictor_threshold", c.predictor_threshold},
          {"checkpoint", c.checkpoint},
          {"output_dir", c.output_dir},
          {"parallel", c.parallel}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "method") c.method = method_from_string(v.get<std::string>());
      else if (key == "teacher") c.teacher = comms::teacher_variant_from_string(v.get<std::string>());
      else if (key == "graph") c.graph = v.get<std::string>();
      else if (key == "main_task") c.main_task = v.get<std::string>();
      else if (key == "setting") c.setting = setting_from_string(v.get<std::string>());
      else if (key == "budget") c.budget = v.get<std::int64_t>();
      else if (key == "grid") c.grid = grid_from_json(v);
      else if (key == "seeds") c.seeds = v.get<std::vector<std::uint64_t>>();
      else if (key == "backend") c.backend = learner::backend_from_string(v.get<std::string>());
      else if (key == "hyperparams") c.hyperparams = learner::hyperparams_from_json(v);
      else if (key == "costs") c.costs = comms::cost_schedule_from_json(v);
      else if (key == "eval_layouts") c.eval_layouts = v.get<int>();
      else if (key == "eval_interval") c.eval_interval = v.is_null() ? std::nullopt : std::optional(v.get<std::int64_t>());
      else if (key == "predictor") c.predictor = baselines::predictor_kind_from_string(v.get<std::string>());
      else if (key == "predictor_threshold") c.predictor_threshold = v.get<double>();
      else if (key == "checkpoint") c.checkpoint = v.get<std::string>();
      else if (key == "output_dir") c.output_dir = v.get<std::string>();
      else if (key == "parallel") c.parallel = v.get<int>();
      else if (key == "comment") continue;
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("bad config value: ") + ex.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config {}", path.string()));
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& ex) {
    throw ConfigError(fmt::format("config {} does not parse: {}", path.string(), ex.what()));
  }
}

nlohmann::json apply_overrides(nlohmann::json j, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(fmt::format("override '{}' is not key=value", o));
    const std::string path = o.substr(0, eq);
    const std::string text = o.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    nlohmann::json* node = &j;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (part.empty()) throw ConfigError(fmt::format("override '{}' has an empty key", o));
      if (!node->is_object()) *node = nlohmann::json::object();
      node = &(*node)[part];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    *node = std::move(value);
  }
  return j;
}

std::string checkpoint_for_seed(const std::string& pattern, std::uint64_t seed) {
  std::string out = pattern;
  const std::string token = "{seed}";
  for (auto pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos)) {
    out.replace(pos, token.size(), std::to_string(seed));
  }
  return out;
}

}  // namespace ceilab::harness
