#include "ceilab/taskgraph/planner.hpp"

#include <algorithm>
#include <limits>

#include <fmt/core.h>

#include "ceilab/common/error.hpp"
#include "ceilab/common/hash.hpp"

namespace ceilab::tasks {

using world::PrimitiveAction;

std::size_t Planner::PackedHash::operator()(const Packed& p) const {
  std::uint64_t h = hash_combine(p.alive, p.cell);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < p.inventory.size(); ++i) {
    word = (word << 8) | p.inventory[i];
    if (i % 8 == 7) {
      h = hash_combine(h, word);
      word = 0;
    }
  }
  return static_cast<std::size_t>(h);
}

std::size_t Planner::CacheKeyHash::operator()(const CacheKey& k) const {
  return static_cast<std::size_t>(
      hash_combine(PackedHash{}(k.state), (static_cast<std::uint64_t>(k.task) << 32) ^ static_cast<std::uint32_t>(k.threshold)));
}

Planner::Planner(const TaskGraph& graph, std::size_t state_limit) : graph_(&graph), state_limit_(state_limit) {
  if (graph.rules().item_count() > kMaxItems) {
    throw GraphError(fmt::format("planner supports at most {} item kinds", kMaxItems));
  }
}

void Planner::bind_layout(const std::shared_ptr<const world::Layout>& layout) {
  if (layout_ == layout) return;
  if (layout->entities.size() > 64) throw GenerationError("planner supports at most 64 entities per layout");
  layout_ = layout;
  cache_.clear();
  entity_at_.assign(static_cast<std::size_t>(layout->width * layout->height), -1);
  for (std::size_t e = 0; e < layout->entities.size(); ++e) {
    entity_at_[static_cast<std::size_t>(layout->cell_index(layout->entities[e].cell))] = static_cast<int>(e);
  }
}

Planner::Packed Planner::pack(const world::WorldState& state) const {
  Packed p;
  for (std::size_t e = 0; e < state.alive.size(); ++e) {
    if (state.alive[e]) p.alive |= std::uint64_t{1} << e;
  }
  p.cell = static_cast<std::uint16_t>(layout_->cell_index(state.agent));
  for (std::size_t i = 0; i < state.inventory.size(); ++i) {
    p.inventory[i] = static_cast<std::uint8_t>(std::clamp(state.inventory[i], 0, 255));
  }
  return p;
}

std::optional<PlanResult> Planner::search(const Packed& start, TaskIndex task, int threshold) {
  const world::Layout& layout = *layout_;
  const world::Rules& rules = graph_->rules();
  const int n_items = rules.item_count();
  const auto out = static_cast<std::size_t>(rules.recipe(task).output);

  struct Edge {
    int from;
    int to;
    std::int8_t action;
    std::int16_t recipe;
  };
  std::vector<Packed> nodes{start};
  std::vector<Edge> edges;
  std::vector<char> goal{0};
  std::unordered_map<Packed, int, PackedHash> index;
  index.emplace(start, 0);

  std::array<int, kMaxItems> inv{};
  auto successor = [&](const Packed& s, PrimitiveAction a, int& fired) {
    fired = -1;
    Packed t = s;
    const world::Cell here{s.cell % layout.width, s.cell / layout.width};
    if (a != PrimitiveAction::Interact) {
      t.cell = static_cast<std::uint16_t>(layout.cell_index(world::move_target(layout, here, a)));
      return t;
    }
    for (int i = 0; i < n_items; ++i) inv[static_cast<std::size_t>(i)] = s.inventory[static_cast<std::size_t>(i)];
    const std::span<const int> inv_span(inv.data(), static_cast<std::size_t>(n_items));
    const world::Cell order[5] = {here, {here.x, here.y - 1}, {here.x, here.y + 1}, {here.x - 1, here.y}, {here.x + 1, here.y}};
    int entity = -1;
    std::optional<world::RecipeId> recipe;
    for (const auto& c : order) {
      if (!layout.in_bounds(c)) continue;
      const int e = entity_at_[static_cast<std::size_t>(layout.cell_index(c))];
      if (e < 0 || !((s.alive >> e) & 1U)) continue;
      recipe = rules.recipe_at(layout.entities[static_cast<std::size_t>(e)].kind, inv_span);
      if (recipe) {
        entity = e;
        break;
      }
    }
    if (!recipe) recipe = rules.recipe_anywhere(inv_span);
    if (!recipe) return t;
    const world::Recipe& r = rules.recipe(*recipe);
    for (const auto& [item, count] : r.inputs) t.inventory[static_cast<std::size_t>(item)] -= static_cast<std::uint8_t>(count);
    if (t.inventory[static_cast<std::size_t>(r.output)] < 255) ++t.inventory[static_cast<std::size_t>(r.output)];
    if (entity >= 0) {
      const auto& info = rules.entity_kind(layout.entities[static_cast<std::size_t>(entity)].kind);
      if (info.consumable && !info.respawn) t.alive &= ~(std::uint64_t{1} << entity);
    }
    fired = *recipe;
    return t;
  };

  std::size_t layer_begin = 0;
  std::size_t layer_end = 1;
  bool found = false;
  while (!found && layer_begin < layer_end) {
    for (std::size_t n = layer_begin; n < layer_end; ++n) {
      for (PrimitiveAction a : world::kWorldActions) {
        int fired = -1;
        const Packed next = successor(nodes[n], a, fired);
        auto [it, inserted] = index.try_emplace(next, static_cast<int>(nodes.size()));
        if (inserted) {
          nodes.push_back(next);
          goal.push_back(next.inventory[out] >= threshold ? 1 : 0);
          if (goal.back()) found = true;
        } else if (static_cast<std::size_t>(it->second) < layer_end) {
          continue;  // not a shortest-path edge
        }
        edges.push_back({static_cast<int>(n), it->second, static_cast<std::int8_t>(a), static_cast<std::int16_t>(fired)});
      }
    }
    layer_begin = layer_end;
    layer_end = nodes.size();
    if (nodes.size() > state_limit_) {
      throw UnreachableError(fmt::format("plan search for '{}' exceeded {} states", graph_->task(task).id, state_limit_));
    }
  }
  if (!found) return std::nullopt;

  // Nodes in the final layer that are not goals are dead ends.
  std::vector<char> useful(nodes.size(), 0);
  for (std::size_t n = layer_begin; n < nodes.size(); ++n) useful[n] = goal[n];
  constexpr int kNone = std::numeric_limits<int>::max();
  std::vector<int> first_event(nodes.size(), kNone);
  std::vector<int> best_edge(nodes.size(), -1);
  for (std::size_t k = edges.size(); k-- > 0;) {
    const Edge& e = edges[k];
    if (!useful[static_cast<std::size_t>(e.to)]) continue;
    useful[static_cast<std::size_t>(e.from)] = 1;
    const int key = e.recipe >= 0 ? e.recipe : first_event[static_cast<std::size_t>(e.to)];
    auto& cur = best_edge[static_cast<std::size_t>(e.from)];
    if (cur < 0 || key < first_event[static_cast<std::size_t>(e.from)] ||
        (key == first_event[static_cast<std::size_t>(e.from)] && e.action < edges[static_cast<std::size_t>(cur)].action)) {
      cur = static_cast<int>(k);
      first_event[static_cast<std::size_t>(e.from)] = key;
    }
  }

  PlanResult result;
  result.first_event = first_event[0];
  int node = 0;
  while (!goal[static_cast<std::size_t>(node)]) {
    const Edge& e = edges[static_cast<std::size_t>(best_edge[static_cast<std::size_t>(node)])];
    result.actions.push_back(static_cast<PrimitiveAction>(e.action));
    node = e.to;
  }
  return result;
}

std::optional<PlanResult> Planner::cached_search(const world::WorldState& state, TaskIndex task, int threshold) {
  bind_layout(state.layout);
  const Packed start = pack(state);
  if (start.inventory[static_cast<std::size_t>(graph_->rules().recipe(task).output)] >= threshold) return PlanResult{};
  CacheKey key{start, task, threshold};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  if (cache_.size() > 200'000) cache_.clear();
  auto result = search(start, task, threshold);
  cache_.emplace(key, result);
  return result;
}

std::optional<PlanResult> Planner::try_plan(const world::WorldState& state, TaskIndex task) {
  return cached_search(state, task, state.count(graph_->rules().recipe(task).output) + 1);
}

PlanResult Planner::plan(const world::WorldState& state, TaskIndex task) {
  auto result = try_plan(state, task);
  if (!result) throw UnreachableError(fmt::format("task '{}' is unreachable", graph_->task(task).id));
  return std::move(*result);
}

PlanResult Planner::plan(const world::WorldState& state, TaskIndex task, const world::WorldState& baseline) {
  const auto out = graph_->rules().recipe(task).output;
  if (state.count(out) > baseline.count(out)) return PlanResult{};
  auto result = cached_search(state, task, baseline.count(out) + 1);
  if (!result) throw UnreachableError(fmt::format("task '{}' is unreachable", graph_->task(task).id));
  return std::move(*result);
}

std::set<IntentionId> Planner::valid_next_intentions(const world::WorldState& state, IntentionId current,
                                                     const world::WorldState& baseline) {
  if (!current.is_task()) throw std::invalid_argument("valid_next_intentions needs a task intention");
  const TaskIndex cur = current.task_index();
  if (world::is_task_satisfied(baseline, state, cur, graph_->rules())) return {kDone};
  const PlanResult p = plan(state, cur, baseline);
  std::set<IntentionId> valid{kDo};
  if (!p.first_event) return valid;
  const TaskIndex event = *p.first_event;
  if (event == cur || !graph_->is_descendant(event, cur)) return valid;
  for (TaskIndex t = 0; t < graph_->size(); ++t) {
    if (!graph_->is_descendant(t, cur)) continue;
    if (t == event || graph_->is_descendant(event, t)) valid.insert(IntentionId::task(t));
  }
  return valid;
}

}  // namespace ceilab::tasks
