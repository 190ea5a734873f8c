#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>

#include "ceilab/comms/teacher.hpp"
#include "ceilab/harness/experiment.hpp"

namespace ceilab::harness {

/// Thrown by HumanTeacher when its input ends.
struct EndOfInput : std::runtime_error {
  EndOfInput() : std::runtime_error("input ended") {}
};

/// Teacher that shows each request on `out` and reads the answer from `in`:
/// an intention id for a verbal utterance, a score in [0, 1] for an
/// execution. Malformed answers are re-prompted.
class HumanTeacher final : public comms::Teacher {
 public:
  HumanTeacher(const tasks::TaskGraph& graph, std::istream& in, std::ostream& out, bool show_valid = true);

  comms::Feedback respond(const comms::TeacherQuery& query) override;
  int rejected_inputs() const { return rejected_; }

 private:
  std::string read_line();

  const tasks::TaskGraph* graph_;
  std::istream* in_;
  std::ostream* out_;
  bool show_valid_;
  int rejected_ = 0;
};

/// One-line summary of a state: agent cell and held items.
std::string describe_state(const world::WorldState& state, const world::Rules& rules);

struct TeachOptions {
  /// Episodes to run; 0 means until the budget is spent.
  int episodes = 1;
  bool show_valid = true;
  std::optional<std::uint64_t> seed;  // defaults to the first configured seed
};

/// Trains a CEIL learner with a person answering every feedback request.
/// A row is recorded before the first episode and after each one. Input
/// ending mid-episode stops the session without charging that request.
SeedRun interactive_teach(const ExperimentConfig& config, std::istream& in, std::ostream& out,
                          const TeachOptions& options = {});

}  // namespace ceilab::harness
