#include "ceilab/learner/features.hpp"

#include <limits>

#include "ceilab/common/error.hpp"
#include "ceilab/common/hash.hpp"

namespace ceilab::learner {

namespace {

std::uint64_t name_hash(std::string_view name) {
  return mix64(fnv1a(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(name.data()), name.size())));
}

constexpr std::uint64_t kInventoryTag = 0x1e7e'0001;
constexpr std::uint64_t kBiasTag = 0xb1a5;
constexpr std::uint64_t kKindOnlyTag = 0x7a1d'0002;
constexpr std::uint64_t kBlockedTag = 0xb10c'0003;

}  // namespace

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::TabularExact: return "tabular_exact";
    case Backend::TabularFactored: return "tabular";
    case Backend::Linear: return "linear";
  }
  return "?";
}

Backend backend_from_string(std::string_view s) {
  if (s == "tabular_exact") return Backend::TabularExact;
  if (s == "tabular" || s == "tabular_factored") return Backend::TabularFactored;
  if (s == "linear") return Backend::Linear;
  throw ConfigError("unknown backend '" + std::string(s) + "'");
}

FeatureVec ExactFeaturizer::encode(const world::Observation& obs) const {
  std::uint64_t h = fnv1a(obs.cells);
  h = hash_combine(h, static_cast<std::uint64_t>(obs.height) << 32 | static_cast<std::uint32_t>(obs.width));
  return {{h, 1.0}};
}

FactoredFeaturizer::FactoredFeaturizer(const world::ChannelMap& channels)
    : agent_channel_(channels.agent), wall_channel_(channels.wall), water_channel_(channels.water) {
  for (int c : channels.entity) entity_channels_.emplace_back(c, name_hash(channels.names[static_cast<std::size_t>(c)]));
  for (int c : channels.item) {
    if (c >= 0) item_channels_.emplace_back(c, name_hash(channels.names[static_cast<std::size_t>(c)]));
  }
}

int FactoredFeaturizer::direction_code(world::Cell agent, std::optional<world::Cell> target) {
  if (!target) return 0;
  const int dx = target->x - agent.x;
  const int dy = target->y - agent.y;
  if (std::abs(dx) + std::abs(dy) <= 1) return 1;
  const int sx = (dx > 0) - (dx < 0);
  const int sy = (dy > 0) - (dy < 0);
  // Sectors numbered 2..9 clockwise from north.
  static constexpr int kSector[3][3] = {{9, 2, 3}, {8, 0, 4}, {7, 6, 5}};
  return kSector[sy + 1][sx + 1];
}

FeatureVec FactoredFeaturizer::encode(const world::Observation& obs) const {
  world::Cell agent{-1, -1};
  for (int y = 0; y < obs.height && agent.x < 0; ++y) {
    for (int x = 0; x < obs.width; ++x) {
      if (obs.at(y, x, agent_channel_)) {
        agent = {x, y};
        break;
      }
    }
  }
  std::uint64_t inv = kInventoryTag;
  for (const auto& [c, h] : item_channels_) {
    if (obs.at(0, 0, c)) inv ^= h;
  }
  // Bit per move (up, down, left, right) that would leave the agent in place.
  const world::Cell moves[4] = {{0, -1}, {0, 1}, {-1, 0}, {1, 0}};
  std::uint64_t blocked = 0;
  for (int m = 0; m < 4; ++m) {
    const int x = agent.x + moves[m].x;
    const int y = agent.y + moves[m].y;
    const bool open = x >= 0 && y >= 0 && x < obs.width && y < obs.height && !obs.at(y, x, wall_channel_) &&
                      !obs.at(y, x, water_channel_);
    if (!open) blocked |= 1u << m;
  }
  const double v = 1.0 / static_cast<double>(2 * entity_channels_.size() + 2);
  FeatureVec out;
  out.reserve(2 * entity_channels_.size() + 2);
  out.push_back({mix64(inv), v});
  out.push_back({hash_combine(hash_combine(kBlockedTag, inv), blocked), v});
  for (const auto& [c, h] : entity_channels_) {
    std::optional<world::Cell> nearest;
    int best = std::numeric_limits<int>::max();
    for (int y = 0; y < obs.height; ++y) {
      for (int x = 0; x < obs.width; ++x) {
        if (!obs.at(y, x, c)) continue;
        const int d = world::manhattan(agent, {x, y});
        if (d < best) {
          best = d;
          nearest = world::Cell{x, y};
        }
      }
    }
    const auto code = static_cast<std::uint64_t>(direction_code(agent, nearest));
    out.push_back({hash_combine(hash_combine(inv, h), code), v});
    out.push_back({hash_combine(hash_combine(kKindOnlyTag, h), code), v});
  }
  return out;
}

LinearFeaturizer::LinearFeaturizer(const world::ChannelMap& channels) {
  for (const auto& name : channels.names) channel_hash_.push_back(name_hash(name));
}

FeatureVec LinearFeaturizer::encode(const world::Observation& obs) const {
  FeatureVec out{{kBiasTag, 1.0}};
  for (int y = 0; y < obs.height; ++y) {
    for (int x = 0; x < obs.width; ++x) {
      for (int c = 0; c < obs.channels; ++c) {
        if (!obs.at(y, x, c)) continue;
        const std::uint64_t pos = static_cast<std::uint64_t>(y) << 16 | static_cast<std::uint64_t>(x);
        out.push_back({hash_combine(channel_hash_[static_cast<std::size_t>(c)], pos), 1.0});
      }
    }
  }
  return out;
}

std::unique_ptr<Featurizer> make_featurizer(Backend backend, const world::ChannelMap& channels) {
  switch (backend) {
    case Backend::TabularExact: return std::make_unique<ExactFeaturizer>();
    case Backend::TabularFactored: return std::make_unique<FactoredFeaturizer>(channels);
    case Backend::Linear: return std::make_unique<LinearFeaturizer>(channels);
  }
  throw ConfigError("unknown backend");
}

}  // namespace ceilab::learner
