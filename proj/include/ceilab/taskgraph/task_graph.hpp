#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ceilab/craftworld/layout.hpp"
#include "ceilab/craftworld/rules.hpp"

namespace ceilab::tasks {

using TaskIndex = int;

inline constexpr std::string_view kDoSymbol = "DO";
inline constexpr std::string_view kDoneSymbol = "DONE";

/// A task id, or one of the reserved symbols DO and DONE.
class IntentionId {
 public:
  constexpr IntentionId() = default;
  static constexpr IntentionId task(TaskIndex t) { return IntentionId(t); }
  static constexpr IntentionId execute() { return IntentionId(kDoCode); }
  static constexpr IntentionId done() { return IntentionId(kDoneCode); }

  constexpr bool is_task() const { return code_ >= 0; }
  constexpr bool is_do() const { return code_ == kDoCode; }
  constexpr bool is_done() const { return code_ == kDoneCode; }
  /// Only valid when is_task().
  constexpr TaskIndex task_index() const { return code_; }
  constexpr int code() const { return code_; }

  constexpr auto operator<=>(const IntentionId&) const = default;

 private:
  static constexpr int kDoCode = -1;
  static constexpr int kDoneCode = -2;
  constexpr explicit IntentionId(int code) : code_(code) {}
  int code_ = kDoneCode;
};

inline constexpr IntentionId kDo = IntentionId::execute();
inline constexpr IntentionId kDone = IntentionId::done();

struct Task {
  std::string id;
  std::string name;
  std::map<std::string, int> required_items;
  std::optional<std::string> workstation;
  std::string produced_item;
  std::set<std::string> parents;
  bool leaf = false;
};

struct EntitySpec {
  std::string kind;
  bool consumable = true;
  bool respawn = false;
};

/// Immutable, validated intention hierarchy. Tasks are indexed in
/// lexicographic id order, which is also the recipe order of rules().
class TaskGraph {
 public:
  static TaskGraph from_json(const nlohmann::json& j);

  int size() const { return static_cast<int>(tasks_.size()); }
  const Task& task(TaskIndex t) const { return tasks_.at(static_cast<std::size_t>(t)); }
  std::optional<TaskIndex> find(std::string_view id) const;
  /// Throws GraphError for an unknown id.
  TaskIndex index_of(std::string_view id) const;

  const std::vector<TaskIndex>& roots() const { return roots_; }
  bool is_root(TaskIndex t) const;
  const std::vector<TaskIndex>& children(TaskIndex t) const { return children_.at(static_cast<std::size_t>(t)); }
  const std::vector<TaskIndex>& parents(TaskIndex t) const { return parents_.at(static_cast<std::size_t>(t)); }
  /// True when `node` lies strictly below `ancestor`.
  bool is_descendant(TaskIndex node, TaskIndex ancestor) const;
  /// Shortest distance from any root.
  int root_distance(TaskIndex t) const { return root_distance_.at(static_cast<std::size_t>(t)); }

  const std::vector<EntitySpec>& entities() const { return entities_; }
  const world::Rules& rules() const { return rules_; }

  /// Instances of each entity kind needed to complete the most demanding root
  /// from scratch (stations count once).
  std::map<std::string, int> entity_demand() const;
  world::GenerationParams default_generation(int width, int height) const;

  std::string describe(IntentionId u) const;
  /// Parses "DO", "DONE" or a task id.
  std::optional<IntentionId> parse_intention(std::string_view text) const;

  nlohmann::json to_json() const;

 private:
  std::vector<Task> tasks_;
  std::vector<EntitySpec> entities_;
  std::vector<TaskIndex> roots_;
  std::vector<std::vector<TaskIndex>> children_;
  std::vector<std::vector<TaskIndex>> parents_;
  std::vector<std::vector<char>> below_;  // below_[a][n]: n strictly below a
  std::vector<int> root_distance_;
  world::Rules rules_;
};

TaskGraph load_graph(std::string_view text);
TaskGraph load_graph_file(const std::filesystem::path& path);

/// Path of a graph shipped in the data directory, e.g. "desk".
std::filesystem::path bundled_graph_path(std::string_view name);

}  // namespace ceilab::tasks
