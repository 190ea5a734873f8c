#include "ceilab/taskgraph/task_graph.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>

#include <fmt/core.h>
#include <fmt/ranges.h>

#include "ceilab/common/error.hpp"

namespace ceilab::tasks {

namespace {

const std::set<std::string> kTaskFields = {"id", "name", "required_items", "workstation", "produced_item", "parents"};
const std::set<std::string> kEntityFields = {"kind", "consumable", "respawn"};
const std::set<std::string> kTopFields = {"entities", "tasks"};

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, std::string_view where) {
  if (!obj.is_object()) throw ParseError(fmt::format("{} must be an object", where));
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ParseError(fmt::format("unknown field '{}' in {}", key, where));
  }
}

}  // namespace

TaskGraph TaskGraph::from_json(const nlohmann::json& j) {
  TaskGraph g;
  try {
    reject_unknown(j, kTopFields, "task graph");
    for (const auto& t : j.at("tasks")) {
      reject_unknown(t, kTaskFields, "task");
      Task task;
      task.id = t.at("id").get<std::string>();
      task.name = t.value("name", task.id);
      if (t.contains("required_items")) task.required_items = t.at("required_items").get<std::map<std::string, int>>();
      if (t.contains("workstation") && !t.at("workstation").is_null()) {
        task.workstation = t.at("workstation").get<std::string>();
      }
      task.produced_item = t.at("produced_item").get<std::string>();
      if (t.contains("parents")) task.parents = t.at("parents").get<std::set<std::string>>();
      g.tasks_.push_back(std::move(task));
    }
    if (j.contains("entities")) {
      for (const auto& e : j.at("entities")) {
        reject_unknown(e, kEntityFields, "entity");
        g.entities_.push_back({e.at("kind").get<std::string>(), e.value("consumable", true), e.value("respawn", false)});
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(fmt::format("malformed task graph: {}", ex.what()));
  }
  if (g.tasks_.empty()) throw GraphError("task graph has no tasks");

  std::sort(g.tasks_.begin(), g.tasks_.end(), [](const Task& a, const Task& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < g.tasks_.size(); ++i) {
    const auto& id = g.tasks_[i].id;
    if (id.empty()) throw GraphError("empty task id");
    if (id == kDoSymbol || id == kDoneSymbol) throw GraphError(fmt::format("task id '{}' is reserved", id));
    if (i > 0 && g.tasks_[i - 1].id == id) throw GraphError(fmt::format("duplicate task id '{}'", id));
  }
  const int n = g.size();
  g.children_.assign(static_cast<std::size_t>(n), {});
  g.parents_.assign(static_cast<std::size_t>(n), {});
  for (TaskIndex t = 0; t < n; ++t) {
    for (const auto& p : g.tasks_[static_cast<std::size_t>(t)].parents) {
      auto pi = g.find(p);
      if (!pi) throw GraphError(fmt::format("task '{}' names unknown parent '{}'", g.task(t).id, p));
      if (*pi == t) throw GraphError(fmt::format("cycle detected: '{}' is its own parent", p));
      g.parents_[static_cast<std::size_t>(t)].push_back(*pi);
      g.children_[static_cast<std::size_t>(*pi)].push_back(t);
    }
  }
  for (auto& c : g.children_) std::sort(c.begin(), c.end());

  // Cycle check by DFS over parent links.
  std::vector<int> color(static_cast<std::size_t>(n), 0);
  std::function<void(TaskIndex)> visit = [&](TaskIndex t) {
    color[static_cast<std::size_t>(t)] = 1;
    for (TaskIndex p : g.parents_[static_cast<std::size_t>(t)]) {
      if (color[static_cast<std::size_t>(p)] == 1) {
        throw GraphError(fmt::format("cycle detected through '{}' and '{}'", g.task(t).id, g.task(p).id));
      }
      if (color[static_cast<std::size_t>(p)] == 0) visit(p);
    }
    color[static_cast<std::size_t>(t)] = 2;
  };
  for (TaskIndex t = 0; t < n; ++t) {
    if (color[static_cast<std::size_t>(t)] == 0) visit(t);
  }

  for (TaskIndex t = 0; t < n; ++t) {
    auto& task = g.tasks_[static_cast<std::size_t>(t)];
    task.leaf = g.children_[static_cast<std::size_t>(t)].empty();
    std::map<std::string, int> from_children;
    for (TaskIndex c : g.children_[static_cast<std::size_t>(t)]) ++from_children[g.task(c).produced_item];
    std::map<std::string, int> required;
    for (const auto& [item, count] : task.required_items) {
      if (count < 0) throw GraphError(fmt::format("task '{}' requires a negative count", task.id));
      if (count > 0) required[item] = count;
    }
    if (required != from_children) {
      throw GraphError(fmt::format("recipe/child mismatch for '{}': requires {} but children produce {}", task.id,
                                   required, from_children));
    }
    if (task.parents.empty()) g.roots_.push_back(t);
  }

  // Strict-descendant table.
  g.below_.assign(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
  for (TaskIndex a = 0; a < n; ++a) {
    std::vector<TaskIndex> stack(g.children(a).begin(), g.children(a).end());
    while (!stack.empty()) {
      TaskIndex c = stack.back();
      stack.pop_back();
      auto& cell = g.below_[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)];
      if (cell) continue;
      cell = 1;
      for (TaskIndex cc : g.children(c)) stack.push_back(cc);
    }
  }

  g.root_distance_.assign(static_cast<std::size_t>(n), -1);
  std::queue<TaskIndex> frontier;
  for (TaskIndex r : g.roots_) {
    g.root_distance_[static_cast<std::size_t>(r)] = 0;
    frontier.push(r);
  }
  while (!frontier.empty()) {
    TaskIndex t = frontier.front();
    frontier.pop();
    for (TaskIndex c : g.children(t)) {
      if (g.root_distance_[static_cast<std::size_t>(c)] >= 0) continue;
      g.root_distance_[static_cast<std::size_t>(c)] = g.root_distance_[static_cast<std::size_t>(t)] + 1;
      frontier.push(c);
    }
  }

  // Entity palette: declared, or inferred from workstations.
  std::set<std::string> used_kinds;
  for (const auto& t : g.tasks_) {
    if (t.workstation) used_kinds.insert(*t.workstation);
  }
  if (g.entities_.empty()) {
    for (const auto& kind : used_kinds) {
      bool only_leaves = true;
      for (const auto& t : g.tasks_) {
        if (t.workstation == kind && !t.leaf) only_leaves = false;
      }
      g.entities_.push_back({kind, only_leaves, false});
    }
  } else {
    std::set<std::string> declared;
    for (const auto& e : g.entities_) {
      if (!declared.insert(e.kind).second) throw GraphError(fmt::format("duplicate entity kind '{}'", e.kind));
    }
    for (const auto& kind : used_kinds) {
      if (!declared.contains(kind)) throw GraphError(fmt::format("workstation '{}' is not a declared entity", kind));
    }
  }

  std::set<std::string> item_names;
  std::set<std::string> ingredients;
  for (const auto& t : g.tasks_) {
    item_names.insert(t.produced_item);
    for (const auto& [item, count] : t.required_items) {
      item_names.insert(item);
      ingredients.insert(item);
    }
  }
  std::vector<std::string> items(item_names.begin(), item_names.end());
  std::vector<bool> observed;
  for (const auto& item : items) observed.push_back(ingredients.contains(item));
  std::vector<world::EntityKindInfo> kinds;
  for (const auto& e : g.entities_) kinds.push_back({e.kind, e.consumable, e.respawn});
  auto item_id = [&](const std::string& name) {
    return static_cast<world::ItemId>(std::lower_bound(items.begin(), items.end(), name) - items.begin());
  };
  std::vector<world::Recipe> recipes;
  for (const auto& t : g.tasks_) {
    world::Recipe r;
    r.name = t.id;
    if (t.workstation) {
      for (std::size_t k = 0; k < kinds.size(); ++k) {
        if (kinds[k].name == *t.workstation) r.workstation = static_cast<world::EntityKindId>(k);
      }
    }
    for (const auto& [item, count] : t.required_items) {
      if (count > 0) r.inputs.emplace_back(item_id(item), count);
    }
    r.output = item_id(t.produced_item);
    recipes.push_back(std::move(r));
  }
  g.rules_ = world::Rules(std::move(kinds), std::move(items), std::move(recipes), std::move(observed));
  return g;
}

std::optional<TaskIndex> TaskGraph::find(std::string_view id) const {
  auto it = std::lower_bound(tasks_.begin(), tasks_.end(), id,
                             [](const Task& t, std::string_view key) { return t.id < key; });
  if (it == tasks_.end() || it->id != id) return std::nullopt;
  return static_cast<TaskIndex>(it - tasks_.begin());
}

TaskIndex TaskGraph::index_of(std::string_view id) const {
  auto t = find(id);
  if (!t) throw GraphError(fmt::format("unknown task id '{}'", id));
  return *t;
}

bool TaskGraph::is_root(TaskIndex t) const {
  return std::find(roots_.begin(), roots_.end(), t) != roots_.end();
}

bool TaskGraph::is_descendant(TaskIndex node, TaskIndex ancestor) const {
  return below_.at(static_cast<std::size_t>(ancestor)).at(static_cast<std::size_t>(node)) != 0;
}

std::map<std::string, int> TaskGraph::entity_demand() const {
  std::map<std::string, bool> consumable;
  for (const auto& e : entities_) consumable[e.kind] = e.consumable && !e.respawn;
  std::function<void(TaskIndex, std::map<std::string, int>&)> expand = [&](TaskIndex t, auto& counts) {
    const auto& task = this->task(t);
    if (task.workstation && consumable[*task.workstation]) ++counts[*task.workstation];
    for (TaskIndex c : children(t)) expand(c, counts);
  };
  std::map<std::string, int> demand;
  for (const auto& e : entities_) demand[e.kind] = 1;
  for (TaskIndex r : roots_) {
    std::map<std::string, int> counts;
    expand(r, counts);
    for (const auto& [kind, count] : counts) demand[kind] = std::max(demand[kind], count);
  }
  return demand;
}

world::GenerationParams TaskGraph::default_generation(int width, int height) const {
  world::GenerationParams p;
  p.width = width;
  p.height = height;
  p.entity_counts = entity_demand();
  return p;
}

std::string TaskGraph::describe(IntentionId u) const {
  if (u.is_do()) return std::string(kDoSymbol);
  if (u.is_done()) return std::string(kDoneSymbol);
  return task(u.task_index()).id;
}

std::optional<IntentionId> TaskGraph::parse_intention(std::string_view text) const {
  if (text == kDoSymbol) return kDo;
  if (text == kDoneSymbol) return kDone;
  if (auto t = find(text)) return IntentionId::task(*t);
  return std::nullopt;
}

nlohmann::json TaskGraph::to_json() const {
  nlohmann::json j;
  auto ents = nlohmann::json::array();
  for (const auto& e : entities_) ents.push_back({{"kind", e.kind}, {"consumable", e.consumable}, {"respawn", e.respawn}});
  j["entities"] = ents;
  auto ts = nlohmann::json::array();
  for (const auto& t : tasks_) {
    nlohmann::json jt = {{"id", t.id}, {"name", t.name}, {"required_items", t.required_items},
                         {"produced_item", t.produced_item}, {"parents", t.parents}};
    jt["workstation"] = t.workstation ? nlohmann::json(*t.workstation) : nlohmann::json(nullptr);
    ts.push_back(std::move(jt));
  }
  j["tasks"] = ts;
  return j;
}

TaskGraph load_graph(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(fmt::format("task graph does not parse: {}", ex.what()));
  }
  return TaskGraph::from_json(j);
}

TaskGraph load_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot read task graph {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_graph(buffer.str());
}

std::filesystem::path bundled_graph_path(std::string_view name) {
  return std::filesystem::path(CEILAB_DATA_DIR) / "graphs" / (std::string(name) + ".json");
}

}  // namespace ceilab::tasks
