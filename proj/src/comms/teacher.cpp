#include "ceilab/comms/teacher.hpp"

#include <algorithm>
#include <cmath>

#include "ceilab/common/error.hpp"

namespace ceilab::comms {

void check_execution(const Execution& execution) {
  if (execution.steps.empty()) throw ProtocolError("execution is empty");
  if (execution.steps.back().action != world::PrimitiveAction::Terminate) {
    throw ProtocolError("execution does not end with Terminate");
  }
}

SuccessStats::SuccessStats(double decay) : decay_(decay) {
  if (!(decay > 0.0 && decay < 1.0)) throw ConfigError("success-rate decay must lie in (0, 1)");
}

double SuccessStats::rho(IntentionId u) const {
  auto it = rho_.find(u);
  return it == rho_.end() ? 0.0 : it->second;
}

void SuccessStats::update(IntentionId u, bool success) {
  double& r = rho_[u];
  r = (1.0 - decay_) * r + decay_ * (success ? 1.0 : 0.0);
  r = std::clamp(r, 0.0, 1.0);
}

void SuccessStats::set(IntentionId u, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("success rate must lie in [0, 1]");
  rho_[u] = rho;
}

SuccessStats update_success_stats(SuccessStats stats, IntentionId u, bool success) {
  stats.update(u, success);
  return stats;
}

std::string_view to_string(TeacherVariant v) {
  switch (v) {
    case TeacherVariant::TopDown: return "top_down";
    case TeacherVariant::LanguageBased: return "language";
    case TeacherVariant::PerformanceBased: return "performance";
  }
  return "?";
}

TeacherVariant teacher_variant_from_string(std::string_view s) {
  if (s == "top_down" || s == "topdown") return TeacherVariant::TopDown;
  if (s == "language" || s == "language_based") return TeacherVariant::LanguageBased;
  if (s == "performance" || s == "performance_based") return TeacherVariant::PerformanceBased;
  throw ConfigError("unknown teacher variant '" + std::string(s) + "'");
}

double score_execution(const Execution& execution, IntentionId current, const tasks::TaskGraph& graph) {
  check_execution(execution);
  if (!current.is_task()) throw ProtocolError("only task intentions can be executed");
  return world::is_task_satisfied(execution.start(), execution.end(), current.task_index(), graph.rules()) ? 1.0 : 0.0;
}

TeacherModel::TeacherModel(TeacherVariant variant, const tasks::TaskGraph& graph, tasks::AbstractionLevels levels,
                           std::uint64_t seed, double stats_decay)
    : variant_(variant), graph_(&graph), levels_(std::move(levels)), rng_(seed), stats_(stats_decay) {
  if (static_cast<int>(levels_.levels().size()) != graph.size()) {
    throw ConfigError("abstraction levels do not match the task graph");
  }
}

int TeacherModel::level(IntentionId u) const {
  return u.is_task() ? levels_.level(u.task_index()) : 0;
}

std::vector<std::pair<IntentionId, double>> TeacherModel::correction_distribution(const std::set<IntentionId>& valid,
                                                                                  IntentionId uttered) const {
  std::vector<IntentionId> candidates;
  for (IntentionId v : valid) {
    if (!v.is_do()) candidates.push_back(v);
  }
  if (candidates.empty()) return {{tasks::kDo, 1.0}};
  std::vector<double> w(candidates.size(), 0.0);
  switch (variant_) {
    case TeacherVariant::TopDown: {
      // Highest level wins; ties go to the first candidate in id order.
      std::size_t best = 0;
      for (std::size_t k = 1; k < candidates.size(); ++k) {
        if (level(candidates[k]) > level(candidates[best])) best = k;
      }
      w[best] = 1.0;
      break;
    }
    case TeacherVariant::LanguageBased: {
      const int target = level(uttered);
      bool exact = false;
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (level(candidates[k]) == target) exact = true;
      }
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        const int d = std::abs(level(candidates[k]) - target);
        w[k] = exact ? (d == 0 ? 1.0 : 0.0) : 1.0 / d;
      }
      break;
    }
    case TeacherVariant::PerformanceBased:
      for (std::size_t k = 0; k < candidates.size(); ++k) w[k] = stats_.rho(candidates[k]) + kPerformanceSmoothing;
      break;
  }
  double total = 0.0;
  for (double x : w) total += x;
  std::vector<std::pair<IntentionId, double>> out;
  for (std::size_t k = 0; k < candidates.size(); ++k) out.emplace_back(candidates[k], w[k] / total);
  return out;
}

IntentionId TeacherModel::correct(const std::set<IntentionId>& valid, IntentionId uttered) {
  const auto dist = correction_distribution(valid, uttered);
  if (dist.size() == 1) return dist.front().first;
  std::vector<double> p;
  for (const auto& [v, prob] : dist) p.push_back(prob);
  if (variant_ == TeacherVariant::TopDown) {
    return dist[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())].first;
  }
  return dist[rng_.weighted_index(p)].first;
}

Feedback TeacherModel::respond(const TeacherQuery& query) {
  if (query.valid.empty()) throw ProtocolError("teacher received an empty valid set");
  if (const auto* verbal = std::get_if<Verbal>(&query.utterance)) {
    if (verbal->intention.is_do()) throw ProtocolError("DO is not a verbal utterance");
    if (query.valid.contains(verbal->intention)) return Instructive{verbal->intention, true};
    return Instructive{correct(query.valid, verbal->intention), false};
  }
  const auto& exec = std::get<Execute>(query.utterance);
  if (!exec.execution) throw ProtocolError("execute utterance without an execution");
  const double score = score_execution(*exec.execution, query.current, *graph_);
  stats_.update(query.current, score > 0.5);
  return Evaluative{score};
}

void TeacherModel::observe_outcome(IntentionId u, bool success) {
  if (u.is_task()) stats_.update(u, success);
}

}  // namespace ceilab::comms
