#include "ceilab/baselines/success_predictor.hpp"

#include <cmath>

#include "ceilab/common/error.hpp"
#include "ceilab/common/hash.hpp"

namespace ceilab::baselines {

namespace {

constexpr std::uint64_t kBiasKey = 0x5ca1ab1e;

std::uint64_t weight_key(std::uint64_t feature, IntentionId u) {
  return hash_combine(feature, static_cast<std::uint64_t>(static_cast<std::int64_t>(u.code())));
}

}  // namespace

std::string_view to_string(PredictorKind k) {
  return k == PredictorKind::RunningAverage ? "running_average" : "logistic";
}

PredictorKind predictor_kind_from_string(std::string_view s) {
  if (s == "running_average") return PredictorKind::RunningAverage;
  if (s == "logistic") return PredictorKind::Logistic;
  throw ConfigError("unknown success predictor '" + std::string(s) + "'");
}

SuccessPredictor::SuccessPredictor(PredictorKind kind, double threshold) : kind_(kind), threshold_(threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("predictor threshold must lie in (0, 1)");
}

double SuccessPredictor::logit(const learner::FeatureVec& f, IntentionId u) const {
  auto w = [&](std::uint64_t key) {
    auto it = weights_.find(weight_key(key, u));
    return it == weights_.end() ? 0.0 : it->second;
  };
  double z = kLogisticBias + w(kBiasKey);
  for (const auto& feat : f) z += feat.value * w(feat.key);
  return z;
}

double SuccessPredictor::predict(const learner::FeatureVec& f, IntentionId u) const {
  if (kind_ == PredictorKind::RunningAverage) {
    auto it = average_.find(u);
    return it == average_.end() ? 0.0 : it->second.mean;
  }
  return 1.0 / (1.0 + std::exp(-logit(f, u)));
}

void SuccessPredictor::update(const learner::FeatureVec& f, IntentionId u, bool success) {
  const double y = success ? 1.0 : 0.0;
  if (kind_ == PredictorKind::RunningAverage) {
    auto& a = average_[u];
    ++a.n;
    a.mean += (y - a.mean) / static_cast<double>(a.n);
    return;
  }
  ++average_[u].n;
  const double err = y - predict(f, u);
  weights_[weight_key(kBiasKey, u)] += kLogisticRate * err;
  for (const auto& feat : f) weights_[weight_key(feat.key, u)] += kLogisticRate * err * feat.value;
}

std::int64_t SuccessPredictor::count(IntentionId u) const {
  auto it = average_.find(u);
  return it == average_.end() ? 0 : it->second.n;
}

nlohmann::json SuccessPredictor::to_json() const {
  nlohmann::json averages = nlohmann::json::array();
  for (const auto& [u, a] : average_) averages.push_back({u.code(), a.n, a.mean});
  std::map<std::uint64_t, double> sorted(weights_.begin(), weights_.end());
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& [k, v] : sorted) weights.push_back({k, v});
  return {{"kind", to_string(kind_)}, {"threshold", threshold_}, {"averages", averages}, {"weights", weights}};
}

SuccessPredictor SuccessPredictor::from_json(const nlohmann::json& j) {
  try {
    SuccessPredictor p(predictor_kind_from_string(j.at("kind").get<std::string>()), j.at("threshold").get<double>());
    for (const auto& row : j.at("averages")) {
      const int code = row.at(0).get<int>();
      const IntentionId u = code >= 0 ? IntentionId::task(code) : (code == tasks::kDo.code() ? tasks::kDo : tasks::kDone);
      p.average_[u] = {row.at(1).get<std::int64_t>(), row.at(2).get<double>()};
    }
    for (const auto& row : j.at("weights")) p.weights_[row.at(0).get<std::uint64_t>()] = row.at(1).get<double>();
    return p;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("bad success predictor state: ") + ex.what());
  }
}

}  // namespace ceilab::baselines
