#include "ceilab/craftworld/layout.hpp"

#include <algorithm>
#include <fstream>
#include <queue>

#include <fmt/core.h>

#include "ceilab/common/error.hpp"
#include "ceilab/common/random.hpp"

namespace ceilab::world {

namespace {

constexpr char terrain_char(Terrain t) {
  switch (t) {
    case Terrain::Floor: return '.';
    case Terrain::Wall: return '#';
    case Terrain::Water: return '~';
  }
  return '?';
}

Terrain terrain_from_char(char c) {
  switch (c) {
    case '.': return Terrain::Floor;
    case '#': return Terrain::Wall;
    case '~': return Terrain::Water;
    default: throw ParseError(fmt::format("unknown terrain character '{}'", c));
  }
}

bool all_floor_connected(const Layout& layout, Cell from, const std::vector<Cell>& targets) {
  std::vector<char> seen(layout.terrain.size(), 0);
  std::queue<Cell> frontier;
  frontier.push(from);
  seen[layout.cell_index(from)] = 1;
  constexpr int dx[] = {0, 0, -1, 1};
  constexpr int dy[] = {-1, 1, 0, 0};
  while (!frontier.empty()) {
    Cell c = frontier.front();
    frontier.pop();
    for (int k = 0; k < 4; ++k) {
      Cell n{c.x + dx[k], c.y + dy[k]};
      if (!layout.walkable(n) || seen[layout.cell_index(n)]) continue;
      seen[layout.cell_index(n)] = 1;
      frontier.push(n);
    }
  }
  return std::all_of(targets.begin(), targets.end(),
                     [&](Cell t) { return seen[layout.cell_index(t)] != 0; });
}

}  // namespace

void Layout::validate(const Rules& rules) const {
  if (width <= 0 || height <= 0) throw GenerationError("layout must have positive size");
  if (terrain.size() != static_cast<std::size_t>(width * height)) {
    throw GenerationError("terrain size does not match width x height");
  }
  if (!walkable(agent_start)) throw GenerationError("agent start is not a floor cell");
  std::vector<char> used(terrain.size(), 0);
  for (const auto& e : entities) {
    if (e.kind < 0 || e.kind >= rules.entity_kind_count()) throw GenerationError("unknown entity kind");
    if (!walkable(e.cell)) throw GenerationError("entity placed off the floor");
    auto& slot = used[cell_index(e.cell)];
    if (slot) throw GenerationError(fmt::format("two entities share cell ({}, {})", e.cell.x, e.cell.y));
    slot = 1;
  }
}

Layout generate_layout(std::uint64_t seed, const GenerationParams& params, const Rules& rules) {
  if (params.width <= 0 || params.height <= 0) throw GenerationError("grid size must be positive");
  std::vector<std::pair<EntityKindId, int>> wanted;
  int total_entities = 0;
  for (const auto& [name, count] : params.entity_counts) {
    auto kind = rules.find_entity_kind(name);
    if (!kind) throw GenerationError(fmt::format("entity kind '{}' is not in the palette", name));
    if (count < 0) throw GenerationError("negative entity count");
    wanted.emplace_back(*kind, count);
    total_entities += count;
  }
  const int cells = params.width * params.height;
  if (total_entities + 1 > cells) throw GenerationError("more entities than floor cells");

  Rng rng(derive_seed(seed, 0x1a7047));
  for (int attempt = 0; attempt < std::max(1, params.max_retries); ++attempt) {
    Layout layout;
    layout.width = params.width;
    layout.height = params.height;
    layout.seed = seed;
    layout.terrain.assign(static_cast<std::size_t>(cells), Terrain::Floor);
    for (auto& t : layout.terrain) {
      double u = rng.uniform01();
      if (u < params.wall_fraction) {
        t = Terrain::Wall;
      } else if (u < params.wall_fraction + params.water_fraction) {
        t = Terrain::Water;
      }
    }
    std::vector<Cell> floor;
    for (int y = 0; y < params.height; ++y) {
      for (int x = 0; x < params.width; ++x) {
        if (layout.walkable({x, y})) floor.push_back({x, y});
      }
    }
    if (static_cast<int>(floor.size()) < total_entities + 1) continue;
    // Partial Fisher-Yates: the first total_entities + 1 cells are the picks.
    for (int i = 0; i <= total_entities; ++i) {
      auto j = i + static_cast<int>(rng.uniform_index(floor.size() - static_cast<std::size_t>(i)));
      std::swap(floor[i], floor[j]);
    }
    layout.agent_start = floor[0];
    int next = 1;
    for (const auto& [kind, count] : wanted) {
      for (int k = 0; k < count; ++k) layout.entities.push_back({kind, floor[next++]});
    }
    std::vector<Cell> targets;
    for (const auto& e : layout.entities) targets.push_back(e.cell);
    if (!all_floor_connected(layout, layout.agent_start, targets)) continue;
    layout.validate(rules);
    return layout;
  }
  throw GenerationError(fmt::format("no valid layout after {} attempts", params.max_retries));
}

nlohmann::json layout_to_json(const Layout& layout, const Rules& rules) {
  nlohmann::json j;
  j["width"] = layout.width;
  j["height"] = layout.height;
  j["seed"] = layout.seed;
  j["agent"] = {layout.agent_start.x, layout.agent_start.y};
  auto rows = nlohmann::json::array();
  for (int y = 0; y < layout.height; ++y) {
    std::string row;
    for (int x = 0; x < layout.width; ++x) row.push_back(terrain_char(layout.at({x, y})));
    rows.push_back(row);
  }
  j["terrain"] = rows;
  auto ents = nlohmann::json::array();
  for (const auto& e : layout.entities) {
    ents.push_back({{"kind", rules.entity_kind(e.kind).name}, {"x", e.cell.x}, {"y", e.cell.y}});
  }
  j["entities"] = ents;
  return j;
}

Layout layout_from_json(const nlohmann::json& j, const Rules& rules) {
  try {
    Layout layout;
    layout.width = j.at("width").get<int>();
    layout.height = j.at("height").get<int>();
    layout.seed = j.value("seed", std::uint64_t{0});
    const auto& agent = j.at("agent");
    layout.agent_start = {agent.at(0).get<int>(), agent.at(1).get<int>()};
    const auto& rows = j.at("terrain");
    if (static_cast<int>(rows.size()) != layout.height) throw ParseError("terrain row count differs from height");
    for (const auto& row : rows) {
      auto text = row.get<std::string>();
      if (static_cast<int>(text.size()) != layout.width) throw ParseError("terrain row length differs from width");
      for (char c : text) layout.terrain.push_back(terrain_from_char(c));
    }
    for (const auto& e : j.at("entities")) {
      auto name = e.at("kind").get<std::string>();
      auto kind = rules.find_entity_kind(name);
      if (!kind) throw ParseError(fmt::format("unknown entity kind '{}'", name));
      layout.entities.push_back({*kind, {e.at("x").get<int>(), e.at("y").get<int>()}});
    }
    layout.validate(rules);
    return layout;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(fmt::format("malformed layout: {}", ex.what()));
  }
}

void write_layout(const std::filesystem::path& path, const Layout& layout, const Rules& rules) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << layout_to_json(layout, rules).dump(2) << '\n';
}

Layout read_layout(const std::filesystem::path& path, const Rules& rules) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot read {}", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(ex.what());
  }
  return layout_from_json(j, rules);
}

nlohmann::json params_to_json(const GenerationParams& params) {
  return {{"width", params.width},
          {"height", params.height},
          {"wall_fraction", params.wall_fraction},
          {"water_fraction", params.water_fraction},
          {"entity_counts", params.entity_counts},
          {"max_retries", params.max_retries}};
}

GenerationParams params_from_json(const nlohmann::json& j) {
  GenerationParams p;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "width") p.width = value.get<int>();
      else if (key == "height") p.height = value.get<int>();
      else if (key == "wall_fraction") p.wall_fraction = value.get<double>();
      else if (key == "water_fraction") p.water_fraction = value.get<double>();
      else if (key == "entity_counts") p.entity_counts = value.get<std::map<std::string, int>>();
      else if (key == "max_retries") p.max_retries = value.get<int>();
      else throw ParseError(fmt::format("unknown generation parameter '{}'", key));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(fmt::format("malformed generation parameters: {}", ex.what()));
  }
  return p;
}

}  // namespace ceilab::world
