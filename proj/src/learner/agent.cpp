#include "ceilab/learner/agent.hpp"

#include <algorithm>
#include <cmath>

#include "ceilab/common/error.hpp"
#include "ceilab/learner/updates.hpp"

namespace ceilab::learner {

using tasks::IntentionId;
using world::PrimitiveAction;

double Hyperparams::effective_lr(Backend backend) const {
  if (lr) return *lr;
  return backend == Backend::Linear ? 5e-5 : 0.1;
}

double Hyperparams::epsilon(double progress) const {
  if (eps_fraction <= 0.0) return eps_end;
  const double frac = std::clamp(progress / eps_fraction, 0.0, 1.0);
  return eps_start + (eps_end - eps_start) * frac;
}

int Hyperparams::updates_for(std::size_t new_items) const {
  return static_cast<int>(std::ceil(static_cast<double>(new_items) * replay_ratio / batch_size));
}

void Hyperparams::validate() const {
  auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(lambda > 0.0) || !(imitation_lambda > 0.0)) throw ConfigError("lambda and imitation_lambda must be positive");
  if (lr && !(*lr > 0.0)) throw ConfigError("lr must be positive");
  if (!in01(eps_start) || !in01(eps_end)) throw ConfigError("epsilon must lie in [0, 1]");
  if (!(eps_fraction >= 0.0)) throw ConfigError("eps_fraction must be non-negative");
  if (l_max < 1 || batch_size < 1 || buffer_capacity < 1 || max_macro_steps < 1) {
    throw ConfigError("l_max, batch_size, buffer_capacity and max_macro_steps must be positive");
  }
  if (!(replay_ratio >= 0.0)) throw ConfigError("replay_ratio must be non-negative");
}

nlohmann::json to_json(const Hyperparams& hp) {
  nlohmann::json j = {{"gamma", hp.gamma},
                      {"lambda", hp.lambda},
                      {"imitation_lambda", hp.imitation_lambda},
                      {"eps_start", hp.eps_start},
                      {"eps_end", hp.eps_end},
                      {"eps_fraction", hp.eps_fraction},
                      {"l_max", hp.l_max},
                      {"buffer_capacity", hp.buffer_capacity},
                      {"batch_size", hp.batch_size},
                      {"replay_ratio", hp.replay_ratio},
                      {"max_macro_steps", hp.max_macro_steps},
                      {"span_imitation", hp.span_imitation}};
  j["lr"] = hp.lr ? nlohmann::json(*hp.lr) : nlohmann::json(nullptr);
  return j;
}

Hyperparams hyperparams_from_json(const nlohmann::json& j, Hyperparams hp) {
  if (!j.is_object()) throw ConfigError("hyperparams must be an object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "gamma") hp.gamma = v.get<double>();
      else if (key == "lambda") hp.lambda = v.get<double>();
      else if (key == "imitation_lambda") hp.imitation_lambda = v.get<double>();
      else if (key == "lr") hp.lr = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
      else if (key == "eps_start") hp.eps_start = v.get<double>();
      else if (key == "eps_end") hp.eps_end = v.get<double>();
      else if (key == "eps_fraction") hp.eps_fraction = v.get<double>();
      else if (key == "l_max") hp.l_max = v.get<int>();
      else if (key == "buffer_capacity") hp.buffer_capacity = v.get<std::size_t>();
      else if (key == "batch_size") hp.batch_size = v.get<int>();
      else if (key == "replay_ratio") hp.replay_ratio = v.get<double>();
      else if (key == "max_macro_steps") hp.max_macro_steps = v.get<int>();
      else if (key == "span_imitation") hp.span_imitation = v.get<bool>();
      else throw ConfigError("unknown hyperparameter '" + key + "'");
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("bad hyperparameter value: ") + ex.what());
  }
  hp.validate();
  return hp;
}

std::size_t epsilon_greedy(std::span<const double> values, double eps, Rng& rng) {
  if (eps > 0.0 && rng.uniform01() < eps) return rng.uniform_index(values.size());
  return argmax(values);
}

Agent::Agent(Backend backend, Hyperparams hp, std::uint64_t seed)
    : hp_(hp), q_(backend), rng_(seed), replay_(hp.buffer_capacity), labeled_(hp.buffer_capacity) {
  hp_.validate();
}

void Agent::bind(const tasks::TaskGraph& graph, const world::ChannelMap& channels) {
  graph_ = &graph;
  channels_ = &channels;
  featurizer_ = make_featurizer(q_.backend(), channels);
  actions_.clear();
  columns_.clear();
  slots_.clear();
  for (tasks::TaskIndex t = 0; t < graph.size(); ++t) {
    const int slot = q_.intern(graph.task(t).id);
    slots_.push_back(slot);
    actions_.push_back(IntentionId::task(t));
    columns_.push_back(task_column(slot));
  }
  actions_.push_back(tasks::kDo);
  columns_.push_back(kDoColumn);
  actions_.push_back(tasks::kDone);
  columns_.push_back(kDoneColumn);
}

void Agent::rebind() {
  if (graph_) bind(*graph_, *channels_);
}

int Agent::column_of(IntentionId u) const {
  if (u.is_do()) return kDoColumn;
  if (u.is_done()) return kDoneColumn;
  return task_column(slot_of(u));
}

int Agent::slot_of(IntentionId task) const {
  if (!task.is_task()) throw ProtocolError("only tasks have intention slots");
  return slots_.at(static_cast<std::size_t>(task.task_index()));
}

std::shared_ptr<const FeatureVec> Agent::encode(const world::WorldState& state) const {
  return std::make_shared<const FeatureVec>(featurizer_->encode(world::observe(state, graph_->rules(), *channels_)));
}

IntentionId Agent::select_intention(const FeatureVec& f, IntentionId current, double eps, Rng& rng) const {
  std::vector<double> v(columns_.size());
  q_.values(f, slot_of(current), Head::Intention, columns_, v);
  return actions_[epsilon_greedy(v, eps, rng)];
}

PrimitiveAction Agent::select_primitive(const FeatureVec& f, IntentionId current, double eps, Rng& rng) const {
  double v[world::kPrimitiveActionCount];
  q_.values(f, slot_of(current), Head::Primitive, std::span<const int>(kPrimitiveColumns), v);
  return static_cast<PrimitiveAction>(epsilon_greedy(v, eps, rng));
}

comms::Execution Agent::execute(const world::WorldState& start, IntentionId intention, double eps, Rng& rng,
                                PrimitiveTrace* trace) const {
  comms::Execution exec;
  world::WorldState state = start;
  for (int l = 1;; ++l) {
    auto f = encode(state);
    PrimitiveAction a = l >= hp_.l_max ? PrimitiveAction::Terminate : select_primitive(*f, intention, eps, rng);
    exec.steps.push_back({state, a});
    if (trace) {
      trace->features.push_back(f);
      trace->actions.push_back(a);
    }
    if (a == PrimitiveAction::Terminate) break;
    world::apply(state, a, graph_->rules());
  }
  return exec;
}

}  // namespace ceilab::learner
