#include "ceilab/craftworld/world.hpp"

#include <stdexcept>

namespace ceilab::world {

std::string_view to_string(PrimitiveAction a) {
  switch (a) {
    case PrimitiveAction::MoveUp: return "up";
    case PrimitiveAction::MoveDown: return "down";
    case PrimitiveAction::MoveLeft: return "left";
    case PrimitiveAction::MoveRight: return "right";
    case PrimitiveAction::Interact: return "interact";
    case PrimitiveAction::Terminate: return "terminate";
  }
  return "?";
}

std::optional<PrimitiveAction> primitive_from_string(std::string_view s) {
  for (int i = 0; i < kPrimitiveActionCount; ++i) {
    auto a = static_cast<PrimitiveAction>(i);
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

bool operator==(const WorldState& a, const WorldState& b) {
  const bool same_layout = a.layout == b.layout || (a.layout && b.layout && *a.layout == *b.layout);
  return same_layout && a.agent == b.agent && a.inventory == b.inventory && a.alive == b.alive &&
         a.step_count == b.step_count;
}

WorldState initial_state(std::shared_ptr<const Layout> layout, const Rules& rules) {
  WorldState s;
  s.agent = layout->agent_start;
  s.inventory.assign(static_cast<std::size_t>(rules.item_count()), 0);
  s.alive.assign(layout->entities.size(), true);
  s.layout = std::move(layout);
  return s;
}

Cell move_target(const Layout& layout, Cell agent, PrimitiveAction a) {
  Cell next = agent;
  switch (a) {
    case PrimitiveAction::MoveUp: --next.y; break;
    case PrimitiveAction::MoveDown: ++next.y; break;
    case PrimitiveAction::MoveLeft: --next.x; break;
    case PrimitiveAction::MoveRight: ++next.x; break;
    default: return agent;
  }
  return layout.walkable(next) ? next : agent;
}

std::optional<RecipeId> apply(WorldState& state, PrimitiveAction action, const Rules& rules) {
  if (action == PrimitiveAction::Terminate) {
    throw std::invalid_argument("Terminate is not a world transition");
  }
  ++state.step_count;
  const Layout& layout = *state.layout;
  if (action != PrimitiveAction::Interact) {
    state.agent = move_target(layout, state.agent, action);
    return std::nullopt;
  }
  auto target = resolve_interact(layout, rules, state.agent, state.inventory,
                                 [&](int e) { return state.alive[static_cast<std::size_t>(e)]; });
  if (!target) return std::nullopt;
  const Recipe& r = rules.recipe(target->recipe);
  for (const auto& [item, count] : r.inputs) state.inventory[static_cast<std::size_t>(item)] -= count;
  ++state.inventory[static_cast<std::size_t>(r.output)];
  if (target->entity >= 0) {
    const auto& info = rules.entity_kind(layout.entities[static_cast<std::size_t>(target->entity)].kind);
    if (info.consumable && !info.respawn) state.alive[static_cast<std::size_t>(target->entity)] = false;
  }
  return target->recipe;
}

WorldState step(const WorldState& state, PrimitiveAction action, const Rules& rules) {
  WorldState next = state;
  apply(next, action, rules);
  return next;
}

bool is_task_satisfied(const WorldState& before, const WorldState& after, RecipeId task, const Rules& rules) {
  const ItemId out = rules.recipe(task).output;
  return after.count(out) > before.count(out);
}

ChannelMap ChannelMap::build(const Rules& rules, int height, int width) {
  ChannelMap m;
  m.height = height;
  m.width = width;
  m.names = {"agent", "wall", "water"};
  for (EntityKindId k = 0; k < rules.entity_kind_count(); ++k) {
    m.entity.push_back(static_cast<int>(m.names.size()));
    m.names.push_back("entity:" + rules.entity_kind(k).name);
  }
  for (ItemId i = 0; i < rules.item_count(); ++i) {
    if (rules.item_observed(i)) {
      m.item.push_back(static_cast<int>(m.names.size()));
      m.names.push_back("inventory:" + rules.item_name(i));
    } else {
      m.item.push_back(-1);
    }
  }
  return m;
}

Observation observe(const WorldState& state, const Rules& rules, const ChannelMap& channels) {
  const Layout& layout = *state.layout;
  if (layout.height != channels.height || layout.width != channels.width) {
    throw std::invalid_argument("observation shape does not match the layout");
  }
  Observation obs;
  obs.height = layout.height;
  obs.width = layout.width;
  obs.channels = channels.channels();
  obs.cells.assign(static_cast<std::size_t>(obs.height * obs.width * obs.channels), 0);
  auto set = [&](int y, int x, int c) {
    obs.cells[static_cast<std::size_t>((y * obs.width + x) * obs.channels + c)] = 1;
  };
  set(state.agent.y, state.agent.x, channels.agent);
  for (int y = 0; y < layout.height; ++y) {
    for (int x = 0; x < layout.width; ++x) {
      Terrain t = layout.at({x, y});
      if (t == Terrain::Wall) set(y, x, channels.wall);
      if (t == Terrain::Water) set(y, x, channels.water);
    }
  }
  for (std::size_t e = 0; e < layout.entities.size(); ++e) {
    if (!state.alive[e]) continue;
    const auto& p = layout.entities[e];
    set(p.cell.y, p.cell.x, channels.entity.at(static_cast<std::size_t>(p.kind)));
  }
  for (ItemId i = 0; i < rules.item_count(); ++i) {
    const int c = channels.item[static_cast<std::size_t>(i)];
    if (c < 0 || state.count(i) < 1) continue;
    for (int y = 0; y < layout.height; ++y) {
      for (int x = 0; x < layout.width; ++x) set(y, x, c);
    }
  }
  return obs;
}

}  // namespace ceilab::world
