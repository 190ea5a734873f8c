#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ceilab/learner/agent.hpp"

namespace ceilab::learner {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  QFunction q;
  Hyperparams hyperparams;
  std::string rng_state;
  std::string method;
  nlohmann::json extra;  // method-specific state
};

nlohmann::json checkpoint_to_json(const Agent& agent, const std::string& method, const nlohmann::json& extra = {});
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Agent& agent, const std::string& method,
                     const nlohmann::json& extra = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies the learned values, hyperparameters and rng state into `agent`.
void restore(Agent& agent, const Checkpoint& checkpoint);

}  // namespace ceilab::learner
