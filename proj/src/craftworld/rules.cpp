#include "ceilab/craftworld/rules.hpp"

#include <stdexcept>

namespace ceilab::world {

int Recipe::input_total() const {
  int total = 0;
  for (const auto& [item, count] : inputs) total += count;
  return total;
}

bool Recipe::applicable(std::span<const int> inventory) const {
  for (const auto& [item, count] : inputs) {
    if (inventory[item] < count) return false;
  }
  return true;
}

Rules::Rules(std::vector<EntityKindInfo> kinds, std::vector<std::string> items,
             std::vector<Recipe> recipes, std::vector<bool> item_observed)
    : kinds_(std::move(kinds)),
      items_(std::move(items)),
      recipes_(std::move(recipes)),
      item_observed_(std::move(item_observed)) {
  if (item_observed_.size() != items_.size()) {
    throw std::invalid_argument("item_observed must have one entry per item");
  }
  by_workstation_.resize(kinds_.size());
  for (RecipeId id = 0; id < recipe_count(); ++id) {
    const auto& r = recipes_[id];
    if (r.output < 0 || r.output >= item_count()) throw std::invalid_argument("recipe output out of range");
    if (r.workstation) {
      by_workstation_.at(*r.workstation).push_back(id);
    } else {
      free_recipes_.push_back(id);
    }
  }
}

const Recipe& Rules::recipe(RecipeId id) const {
  if (id < 0 || id >= recipe_count()) throw std::out_of_range("unknown task id " + std::to_string(id));
  return recipes_[id];
}

std::optional<EntityKindId> Rules::find_entity_kind(const std::string& name) const {
  for (EntityKindId i = 0; i < entity_kind_count(); ++i) {
    if (kinds_[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<ItemId> Rules::find_item(const std::string& name) const {
  for (ItemId i = 0; i < item_count(); ++i) {
    if (items_[i] == name) return i;
  }
  return std::nullopt;
}

std::optional<RecipeId> Rules::best_of(std::span<const RecipeId> candidates,
                                       std::span<const int> inventory) const {
  std::optional<RecipeId> best;
  int best_inputs = -1;
  for (RecipeId id : candidates) {
    const auto& r = recipes_[id];
    if (!r.applicable(inventory)) continue;
    if (r.input_total() > best_inputs) {
      best = id;
      best_inputs = r.input_total();
    }
  }
  return best;
}

std::optional<RecipeId> Rules::recipe_at(EntityKindId kind, std::span<const int> inventory) const {
  return best_of(by_workstation_.at(kind), inventory);
}

std::optional<RecipeId> Rules::recipe_anywhere(std::span<const int> inventory) const {
  return best_of(free_recipes_, inventory);
}

}  // namespace ceilab::world
