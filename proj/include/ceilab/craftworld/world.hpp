#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ceilab/craftworld/layout.hpp"
#include "ceilab/craftworld/rules.hpp"

namespace ceilab::world {

enum class PrimitiveAction : std::uint8_t { MoveUp, MoveDown, MoveLeft, MoveRight, Interact, Terminate };

inline constexpr int kPrimitiveActionCount = 6;
inline constexpr std::array<PrimitiveAction, 5> kWorldActions = {
    PrimitiveAction::MoveUp, PrimitiveAction::MoveDown, PrimitiveAction::MoveLeft,
    PrimitiveAction::MoveRight, PrimitiveAction::Interact};

std::string_view to_string(PrimitiveAction a);
std::optional<PrimitiveAction> primitive_from_string(std::string_view s);

struct WorldState {
  std::shared_ptr<const Layout> layout;
  Cell agent;
  std::vector<int> inventory;  // indexed by ItemId
  std::vector<bool> alive;     // indexed like layout->entities
  std::uint64_t step_count = 0;

  int count(ItemId item) const { return inventory.at(static_cast<std::size_t>(item)); }
};

bool operator==(const WorldState& a, const WorldState& b);

WorldState initial_state(std::shared_ptr<const Layout> layout, const Rules& rules);

/// Entity and recipe an Interact fires. Cells are tried in the order: own
/// cell, up, down, left, right; the first alive entity with an applicable
/// recipe wins. Otherwise a workstation-free recipe, if any applies.
struct InteractTarget {
  int entity = -1;  // index into layout.entities, or -1 for workstation-free recipes
  RecipeId recipe = -1;
};

template <class AliveFn>
std::optional<InteractTarget> resolve_interact(const Layout& layout, const Rules& rules, Cell agent,
                                               std::span<const int> inventory, AliveFn&& alive) {
  const Cell order[5] = {agent, {agent.x, agent.y - 1}, {agent.x, agent.y + 1},
                         {agent.x - 1, agent.y}, {agent.x + 1, agent.y}};
  for (const Cell& c : order) {
    if (!layout.in_bounds(c)) continue;
    for (int e = 0; e < static_cast<int>(layout.entities.size()); ++e) {
      const auto& placement = layout.entities[static_cast<std::size_t>(e)];
      if (placement.cell != c || !alive(e)) continue;
      if (auto r = rules.recipe_at(placement.kind, inventory)) return InteractTarget{e, *r};
    }
  }
  if (auto r = rules.recipe_anywhere(inventory)) return InteractTarget{-1, *r};
  return std::nullopt;
}

/// Cell reached by a move; the agent stays put when the target is blocked.
Cell move_target(const Layout& layout, Cell agent, PrimitiveAction a);

/// Applies one primitive action in place. Returns the recipe fired, if any.
/// Terminate is rejected with std::invalid_argument.
std::optional<RecipeId> apply(WorldState& state, PrimitiveAction action, const Rules& rules);

/// Pure transition: returns the successor of `state`.
WorldState step(const WorldState& state, PrimitiveAction action, const Rules& rules);

/// Effect-based completion: the recipe's output count went up between the
/// two states. Throws std::out_of_range for an unknown recipe id.
bool is_task_satisfied(const WorldState& before, const WorldState& after, RecipeId task, const Rules& rules);

/// Channel assignment for observations.
struct ChannelMap {
  int height = 0;
  int width = 0;
  int agent = 0;
  int wall = 1;
  int water = 2;
  std::vector<int> entity;  // per EntityKindId
  std::vector<int> item;    // per ItemId, -1 when the item has no channel
  std::vector<std::string> names;

  int channels() const { return static_cast<int>(names.size()); }
  static ChannelMap build(const Rules& rules, int height, int width);
};

/// Binary grid of shape height x width x channels, stored row-major with the
/// channel index fastest.
struct Observation {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> cells;

  std::uint8_t at(int y, int x, int c) const {
    return cells[static_cast<std::size_t>((y * width + x) * channels + c)];
  }
  bool operator==(const Observation&) const = default;
};

Observation observe(const WorldState& state, const Rules& rules, const ChannelMap& channels);

}  // namespace ceilab::world
