#pragma once

#include "ceilab/baselines/success_predictor.hpp"
#include "ceilab/learner/method.hpp"

namespace ceilab::baselines {

using learner::EpisodeSummary;
using learner::EvalResult;
using learner::MethodContext;

/// Hierarchical imitation (DAgger over intentions). Every decision is put to
/// the teacher verbally, DO included: DO is accepted only when the current
/// intention has nothing left to decompose. Accepted executions are labeled
/// step by step like the flat imitation baseline, so no evaluative requests
/// are made.
class HilMethod : public learner::Method {
 public:
  explicit HilMethod(const MethodContext& context) : Method(context) {}

  std::string name() const override { return "hil"; }
  EpisodeSummary train_episode(std::shared_ptr<const world::Layout> layout, double progress,
                               std::int64_t request_limit) override;

 protected:
  /// Whether to execute `current` without asking first.
  virtual bool execute_directly(const learner::FeatureVec&, IntentionId) const { return false; }
  /// Outcome of an execution of `current` started from features `f`.
  virtual void on_executed(const learner::FeatureVec&, IntentionId, bool) {}
};

/// HIL plus a success predictor: an intention predicted to succeed is
/// executed straight away and scored by the teacher.
class AhilMethod final : public HilMethod {
 public:
  AhilMethod(const MethodContext& context, SuccessPredictor predictor = SuccessPredictor());

  std::string name() const override { return "ahil"; }
  EvalResult evaluate(std::shared_ptr<const world::Layout> layout) const override;
  nlohmann::json extra_state() const override { return predictor_.to_json(); }
  void load_extra_state(const nlohmann::json& j) override;

  const SuccessPredictor& predictor() const { return predictor_; }

 protected:
  bool execute_directly(const learner::FeatureVec& f, IntentionId current) const override;
  void on_executed(const learner::FeatureVec& f, IntentionId current, bool success) override;

 private:
  SuccessPredictor predictor_;
};

}  // namespace ceilab::baselines
