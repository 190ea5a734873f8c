#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ceilab/craftworld/world.hpp"

namespace ceilab::learner {

struct Feature {
  std::uint64_t key = 0;
  double value = 0.0;
  bool operator==(const Feature&) const = default;
};

using FeatureVec = std::vector<Feature>;

enum class Backend { TabularExact, TabularFactored, Linear };

std::string_view to_string(Backend b);
Backend backend_from_string(std::string_view s);

/// Tabular backends take per-entry normalized steps; the linear backend takes
/// plain gradient steps.
inline bool normalized_steps(Backend b) { return b != Backend::Linear; }

/// Maps an observation to sparse features. Keys are derived from channel
/// names, so they stay meaningful when the task graph (and with it the
/// channel layout) is extended.
class Featurizer {
 public:
  virtual ~Featurizer() = default;
  virtual FeatureVec encode(const world::Observation& obs) const = 0;
};

/// One feature per distinct observation.
class ExactFeaturizer final : public Featurizer {
 public:
  FeatureVec encode(const world::Observation& obs) const override;
};

/// Features of the inventory presence pattern: the pattern alone, the pattern
/// with the set of blocked moves, and per entity kind the pattern with the
/// direction of the nearest live entity of the kind (absent, within reach, or
/// one of eight compass sectors). The last also appears without the pattern.
class FactoredFeaturizer final : public Featurizer {
 public:
  explicit FactoredFeaturizer(const world::ChannelMap& channels);
  FeatureVec encode(const world::Observation& obs) const override;

  static int direction_code(world::Cell agent, std::optional<world::Cell> target);

 private:
  int agent_channel_;
  int wall_channel_;
  int water_channel_;
  std::vector<std::pair<int, std::uint64_t>> entity_channels_;  // channel, name hash
  std::vector<std::pair<int, std::uint64_t>> item_channels_;
};

/// Bias plus one feature per set observation bit.
class LinearFeaturizer final : public Featurizer {
 public:
  explicit LinearFeaturizer(const world::ChannelMap& channels);
  FeatureVec encode(const world::Observation& obs) const override;

 private:
  std::vector<std::uint64_t> channel_hash_;
};

std::unique_ptr<Featurizer> make_featurizer(Backend backend, const world::ChannelMap& channels);

}  // namespace ceilab::learner
