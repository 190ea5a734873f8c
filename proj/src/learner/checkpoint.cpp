#include "ceilab/learner/checkpoint.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/core.h>

#include "ceilab/common/error.hpp"

namespace ceilab::learner {

nlohmann::json checkpoint_to_json(const Agent& agent, const std::string& method, const nlohmann::json& extra) {
  const QFunction& q = agent.q();
  std::vector<std::uint64_t> keys;
  keys.reserve(q.rows().size());
  for (const auto& [key, row] : q.rows()) keys.push_back(key);
  std::sort(keys.begin(), keys.end());
  auto rows = nlohmann::json::array();
  for (auto key : keys) rows.push_back({fmt::format("{:016x}", key), q.rows().at(key)});
  return {{"format", "ceilab-checkpoint"},
          {"version", kCheckpointVersion},
          {"method", method},
          {"backend", std::string(to_string(q.backend()))},
          {"vocabulary", q.vocabulary()},
          {"hyperparams", to_json(agent.hyperparams())},
          {"rng", agent.rng().serialize()},
          {"rows", std::move(rows)},
          {"extra", extra.is_null() ? nlohmann::json::object() : extra}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "ceilab-checkpoint") throw ParseError("not a checkpoint file");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw ParseError(fmt::format("unsupported checkpoint version {}", j.at("version").get<int>()));
    }
    Checkpoint c{QFunction(backend_from_string(j.at("backend").get<std::string>())), {}, {}, {}, {}};
    for (const auto& id : j.at("vocabulary")) c.q.intern(id.get<std::string>());
    std::unordered_map<std::uint64_t, std::vector<double>> rows;
    for (const auto& r : j.at("rows")) {
      rows.emplace(std::stoull(r.at(0).get<std::string>(), nullptr, 16), r.at(1).get<std::vector<double>>());
    }
    c.q.set_rows(std::move(rows));
    c.hyperparams = hyperparams_from_json(j.at("hyperparams"));
    c.rng_state = j.at("rng").get<std::string>();
    c.method = j.value("method", "");
    c.extra = j.value("extra", nlohmann::json::object());
    return c;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(fmt::format("malformed checkpoint: {}", ex.what()));
  }
}

void save_checkpoint(const std::filesystem::path& path, const Agent& agent, const std::string& method,
                     const nlohmann::json& extra) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write checkpoint {}", path.string()));
  out << checkpoint_to_json(agent, method, extra).dump() << '\n';
  if (!out) throw Error(fmt::format("failed writing checkpoint {}", path.string()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot read checkpoint {}", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(fmt::format("checkpoint {} does not parse: {}", path.string(), ex.what()));
  }
  return checkpoint_from_json(j);
}

void restore(Agent& agent, const Checkpoint& checkpoint) {
  if (checkpoint.q.backend() != agent.q().backend()) throw ConfigError("checkpoint backend does not match the learner");
  agent.q() = checkpoint.q;
  agent.hyperparams() = checkpoint.hyperparams;
  agent.rng().deserialize(checkpoint.rng_state);
  agent.rebind();
}

}  // namespace ceilab::learner
