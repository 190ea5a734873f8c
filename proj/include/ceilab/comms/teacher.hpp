#pragma once

#include <map>
#include <memory>
#include <set>
#include <string_view>
#include <variant>
#include <vector>

#include "ceilab/common/random.hpp"
#include "ceilab/comms/cost.hpp"
#include "ceilab/craftworld/world.hpp"
#include "ceilab/taskgraph/abstraction.hpp"
#include "ceilab/taskgraph/task_graph.hpp"

namespace ceilab::comms {

using tasks::IntentionId;

struct ExecutionStep {
  world::WorldState state;
  world::PrimitiveAction action;
};

/// (s^1, a^1, ..., s^L, a^L); the last action is always Terminate, so the
/// last state is also the final one.
struct Execution {
  std::vector<ExecutionStep> steps;

  const world::WorldState& start() const { return steps.front().state; }
  const world::WorldState& end() const { return steps.back().state; }
};

struct Verbal {
  IntentionId intention;  // never DO
};

struct Execute {
  const Execution* execution = nullptr;
};

using Utterance = std::variant<Verbal, Execute>;

/// Validates the Execute invariants; throws ProtocolError.
void check_execution(const Execution& execution);

/// Per-intention moving success rate.
class SuccessStats {
 public:
  explicit SuccessStats(double decay = 0.1);

  double rho(IntentionId u) const;
  void update(IntentionId u, bool success);
  /// Overwrites the rate of `u`; throws ConfigError outside [0, 1].
  void set(IntentionId u, double rho);
  double decay() const { return decay_; }
  const std::map<IntentionId, double>& table() const { return rho_; }

 private:
  double decay_;
  std::map<IntentionId, double> rho_;
};

SuccessStats update_success_stats(SuccessStats stats, IntentionId u, bool success);

enum class TeacherVariant { TopDown, LanguageBased, PerformanceBased };

std::string_view to_string(TeacherVariant v);
TeacherVariant teacher_variant_from_string(std::string_view s);

/// What the teacher sees when asked for feedback.
struct TeacherQuery {
  const std::set<IntentionId>& valid;
  const Utterance& utterance;
  IntentionId current;
  const world::WorldState& state;
};

class Teacher {
 public:
  virtual ~Teacher() = default;
  /// Throws ProtocolError when the valid set is empty.
  virtual Feedback respond(const TeacherQuery& query) = 0;
  /// Outcome of an execution the teacher watched without being asked to
  /// score it.
  virtual void observe_outcome(IntentionId, bool) {}
};

/// Simulated teacher following one of the three correction rules.
class TeacherModel final : public Teacher {
 public:
  static constexpr double kPerformanceSmoothing = 0.01;

  TeacherModel(TeacherVariant variant, const tasks::TaskGraph& graph, tasks::AbstractionLevels levels,
               std::uint64_t seed, double stats_decay = 0.1);

  Feedback respond(const TeacherQuery& query) override;
  void observe_outcome(IntentionId u, bool success) override;

  /// Correction for a wrong utterance `uttered`.
  IntentionId correct(const std::set<IntentionId>& valid, IntentionId uttered);
  /// Closed-form correction distribution over valid minus DO, for testing.
  std::vector<std::pair<IntentionId, double>> correction_distribution(const std::set<IntentionId>& valid,
                                                                      IntentionId uttered) const;

  TeacherVariant variant() const { return variant_; }
  const SuccessStats& stats() const { return stats_; }
  Rng& rng() { return rng_; }
  int level(IntentionId u) const;

 private:
  TeacherVariant variant_;
  const tasks::TaskGraph* graph_;
  tasks::AbstractionLevels levels_;
  Rng rng_;
  SuccessStats stats_;
};

/// Score of an execution of `current`.
double score_execution(const Execution& execution, IntentionId current, const tasks::TaskGraph& graph);

}  // namespace ceilab::comms
