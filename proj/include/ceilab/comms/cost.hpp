#pragma once

#include <cstdint>
#include <variant>

#include <json.hpp>

#include "ceilab/taskgraph/task_graph.hpp"

namespace ceilab::comms {

/// Correction or confirmation of a verbal utterance.
struct Instructive {
  tasks::IntentionId correct;
  bool was_learner_correct = false;
  bool operator==(const Instructive&) const = default;
};

/// Score of an execution, in [0, 1].
struct Evaluative {
  double score = 0.0;
  bool operator==(const Evaluative&) const = default;
};

using Feedback = std::variant<Instructive, Evaluative>;

struct CostSchedule {
  double c_correct = 0.01;
  double c_incorrect = 0.05;
  double c_eval = 0.2;

  bool operator==(const CostSchedule&) const = default;
};

nlohmann::json to_json(const CostSchedule& s);
CostSchedule cost_schedule_from_json(const nlohmann::json& j);

/// Running communication cost. Amounts are kept in integer micro-units so
/// totals stay exact over long runs.
class CostLedger {
 public:
  static constexpr std::int64_t kMicro = 1'000'000;

  CostLedger() = default;
  explicit CostLedger(const CostSchedule& schedule);

  /// Charges one feedback and returns the amount charged.
  double charge(const Feedback& feedback);

  std::int64_t correct_instructive() const { return correct_; }
  std::int64_t incorrect_instructive() const { return incorrect_; }
  std::int64_t evaluative() const { return evaluative_; }
  std::int64_t request_count() const { return correct_ + incorrect_ + evaluative_; }
  std::int64_t total_micro() const;
  double total() const { return static_cast<double>(total_micro()) / kMicro; }

  const CostSchedule& schedule() const { return schedule_; }
  /// Cost of one feedback of the given kind, in micro-units.
  std::int64_t micro_cost(const Feedback& feedback) const;

  bool operator==(const CostLedger&) const = default;

 private:
  CostSchedule schedule_;
  std::int64_t correct_micro_ = 10'000;
  std::int64_t incorrect_micro_ = 50'000;
  std::int64_t eval_micro_ = 200'000;
  std::int64_t correct_ = 0;
  std::int64_t incorrect_ = 0;
  std::int64_t evaluative_ = 0;
};

CostLedger charge(CostLedger ledger, const Feedback& feedback);

}  // namespace ceilab::comms
