#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ceilab::world {

using ItemId = int;
using EntityKindId = int;
using RecipeId = int;

struct EntityKindInfo {
  std::string name;
  bool consumable = true;  // removed from the world when interacted with
  bool respawn = false;    // consumable kinds that stay alive after use
};

/// A crafting rule. Interact next to `workstation` (or anywhere, when unset)
/// with every input in the inventory consumes the inputs and adds one output.
struct Recipe {
  std::string name;
  std::optional<EntityKindId> workstation;
  std::vector<std::pair<ItemId, int>> inputs;
  ItemId output = 0;

  int input_total() const;
  bool applicable(std::span<const int> inventory) const;
};

/// Entity and item vocabulary plus the recipe table used by the simulator.
class Rules {
 public:
  Rules() = default;
  Rules(std::vector<EntityKindInfo> kinds, std::vector<std::string> items,
        std::vector<Recipe> recipes, std::vector<bool> item_observed);

  int entity_kind_count() const { return static_cast<int>(kinds_.size()); }
  int item_count() const { return static_cast<int>(items_.size()); }
  int recipe_count() const { return static_cast<int>(recipes_.size()); }

  const EntityKindInfo& entity_kind(EntityKindId id) const { return kinds_.at(id); }
  const std::string& item_name(ItemId id) const { return items_.at(id); }
  /// Throws std::out_of_range for an unknown recipe (task) id.
  const Recipe& recipe(RecipeId id) const;
  std::span<const Recipe> recipes() const { return recipes_; }

  /// Items that get an inventory channel in observations.
  bool item_observed(ItemId id) const { return item_observed_.at(id); }

  std::optional<EntityKindId> find_entity_kind(const std::string& name) const;
  std::optional<ItemId> find_item(const std::string& name) const;

  /// Recipe fired by interacting with an entity of `kind`: the applicable one
  /// with the most inputs, ties to the lowest id.
  std::optional<RecipeId> recipe_at(EntityKindId kind, std::span<const int> inventory) const;
  /// Same, for recipes that need no workstation.
  std::optional<RecipeId> recipe_anywhere(std::span<const int> inventory) const;

 private:
  std::optional<RecipeId> best_of(std::span<const RecipeId> candidates, std::span<const int> inventory) const;

  std::vector<EntityKindInfo> kinds_;
  std::vector<std::string> items_;
  std::vector<Recipe> recipes_;
  std::vector<bool> item_observed_;
  std::vector<std::vector<RecipeId>> by_workstation_;
  std::vector<RecipeId> free_recipes_;
};

}  // namespace ceilab::world
