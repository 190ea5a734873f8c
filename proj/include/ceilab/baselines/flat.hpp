#pragma once

#include "ceilab/learner/method.hpp"

namespace ceilab::baselines {

using learner::EpisodeSummary;
using learner::EvalResult;
using learner::MethodContext;

/// Flat imitation (DAgger): the learner rolls out its primitive policy for
/// the main task and the teacher labels every step with the planner's action.
/// Each label is charged as instructive feedback, correct when it matches the
/// learner's action.
class FilMethod final : public learner::Method {
 public:
  explicit FilMethod(const MethodContext& context) : Method(context) {}

  std::string name() const override { return "fil"; }
  EpisodeSummary train_episode(std::shared_ptr<const world::Layout> layout, double progress,
                               std::int64_t request_limit) override;
  EvalResult evaluate(std::shared_ptr<const world::Layout> layout) const override;
};

/// Flat Q-learning over primitive actions. The only reward is the teacher's
/// score of the whole episode, one evaluative request per episode.
class FrlMethod final : public learner::Method {
 public:
  explicit FrlMethod(const MethodContext& context) : Method(context) {}

  std::string name() const override { return "frl"; }
  EpisodeSummary train_episode(std::shared_ptr<const world::Layout> layout, double progress,
                               std::int64_t request_limit) override;
  EvalResult evaluate(std::shared_ptr<const world::Layout> layout) const override;
};

}  // namespace ceilab::baselines
