#include "ceilab/comms/cost.hpp"

#include <cmath>

#include "ceilab/common/error.hpp"

namespace ceilab::comms {

namespace {

std::int64_t to_micro(double cost) {
  if (!(cost >= 0.0) || !std::isfinite(cost)) throw ConfigError("costs must be finite and non-negative");
  return std::llround(cost * static_cast<double>(CostLedger::kMicro));
}

}  // namespace

nlohmann::json to_json(const CostSchedule& s) {
  return {{"c_correct", s.c_correct}, {"c_incorrect", s.c_incorrect}, {"c_eval", s.c_eval}};
}

CostSchedule cost_schedule_from_json(const nlohmann::json& j) {
  CostSchedule s;
  for (const auto& [key, value] : j.items()) {
    if (key == "c_correct") s.c_correct = value.get<double>();
    else if (key == "c_incorrect") s.c_incorrect = value.get<double>();
    else if (key == "c_eval") s.c_eval = value.get<double>();
    else throw ConfigError("unknown cost field '" + key + "'");
  }
  return s;
}

CostLedger::CostLedger(const CostSchedule& schedule)
    : schedule_(schedule),
      correct_micro_(to_micro(schedule.c_correct)),
      incorrect_micro_(to_micro(schedule.c_incorrect)),
      eval_micro_(to_micro(schedule.c_eval)) {}

std::int64_t CostLedger::micro_cost(const Feedback& feedback) const {
  if (const auto* ins = std::get_if<Instructive>(&feedback)) {
    return ins->was_learner_correct ? correct_micro_ : incorrect_micro_;
  }
  return eval_micro_;
}

double CostLedger::charge(const Feedback& feedback) {
  if (const auto* ins = std::get_if<Instructive>(&feedback)) {
    ++(ins->was_learner_correct ? correct_ : incorrect_);
  } else {
    ++evaluative_;
  }
  return static_cast<double>(micro_cost(feedback)) / kMicro;
}

std::int64_t CostLedger::total_micro() const {
  return correct_ * correct_micro_ + incorrect_ * incorrect_micro_ + evaluative_ * eval_micro_;
}

CostLedger charge(CostLedger ledger, const Feedback& feedback) {
  ledger.charge(feedback);
  return ledger;
}

}  // namespace ceilab::comms
