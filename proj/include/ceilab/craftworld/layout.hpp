#pragma once

#include <compare>
#include <cstdlib>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ceilab/craftworld/rules.hpp"

namespace ceilab::world {

enum class Terrain : std::uint8_t { Floor, Wall, Water };

/// Grid cell; x grows rightwards, y grows downwards.
struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

inline int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

struct EntityPlacement {
  EntityKindId kind = 0;
  Cell cell;
  bool operator==(const EntityPlacement&) const = default;
};

struct Layout {
  int width = 0;
  int height = 0;
  std::vector<Terrain> terrain;  // row-major
  std::vector<EntityPlacement> entities;
  Cell agent_start;
  std::uint64_t seed = 0;

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  Terrain at(Cell c) const { return terrain[static_cast<std::size_t>(c.y * width + c.x)]; }
  bool walkable(Cell c) const { return in_bounds(c) && at(c) == Terrain::Floor; }
  int cell_index(Cell c) const { return c.y * width + c.x; }

  /// Checks the structural invariants; throws GenerationError on violation.
  void validate(const Rules& rules) const;

  bool operator==(const Layout&) const = default;
};

struct GenerationParams {
  int width = 6;
  int height = 6;
  double wall_fraction = 0.0;
  double water_fraction = 0.0;
  /// Entity kind name -> number of instances to place.
  std::map<std::string, int> entity_counts;
  int max_retries = 200;

  bool operator==(const GenerationParams&) const = default;
};

/// Deterministic in (seed, params, rules). Throws GenerationError when the
/// params name an entity kind missing from the rules' palette or when no
/// connected placement is found within the retry bound.
Layout generate_layout(std::uint64_t seed, const GenerationParams& params, const Rules& rules);

nlohmann::json layout_to_json(const Layout& layout, const Rules& rules);
Layout layout_from_json(const nlohmann::json& j, const Rules& rules);
void write_layout(const std::filesystem::path& path, const Layout& layout, const Rules& rules);
Layout read_layout(const std::filesystem::path& path, const Rules& rules);

nlohmann::json params_to_json(const GenerationParams& params);
GenerationParams params_from_json(const nlohmann::json& j);

}  // namespace ceilab::world
