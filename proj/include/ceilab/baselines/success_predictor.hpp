#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <unordered_map>

#include <json.hpp>

#include "ceilab/learner/features.hpp"
#include "ceilab/taskgraph/task_graph.hpp"

namespace ceilab::baselines {

using tasks::IntentionId;

enum class PredictorKind { RunningAverage, Logistic };

std::string_view to_string(PredictorKind k);
PredictorKind predictor_kind_from_string(std::string_view s);

/// Estimates the probability that executing an intention succeeds, learned
/// from outcomes labeled after the fact.
class SuccessPredictor {
 public:
  static constexpr double kDefaultThreshold = 0.5;
  static constexpr double kLogisticRate = 0.5;
  static constexpr double kLogisticBias = -4.0;

  explicit SuccessPredictor(PredictorKind kind = PredictorKind::RunningAverage,
                            double threshold = kDefaultThreshold);

  /// In [0, 1]. The running average ignores the features.
  double predict(const learner::FeatureVec& f, IntentionId u) const;
  bool should_execute(const learner::FeatureVec& f, IntentionId u) const { return predict(f, u) >= threshold_; }
  void update(const learner::FeatureVec& f, IntentionId u, bool success);

  PredictorKind kind() const { return kind_; }
  double threshold() const { return threshold_; }
  /// Number of labels seen for `u`.
  std::int64_t count(IntentionId u) const;

  nlohmann::json to_json() const;
  static SuccessPredictor from_json(const nlohmann::json& j);

 private:
  struct Average {
    std::int64_t n = 0;
    double mean = 0.0;
  };

  double logit(const learner::FeatureVec& f, IntentionId u) const;

  PredictorKind kind_;
  double threshold_;
  std::map<IntentionId, Average> average_;
  std::unordered_map<std::uint64_t, double> weights_;
};

}  // namespace ceilab::baselines
