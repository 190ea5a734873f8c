#include "ceilab/harness/interactive.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include <fmt/core.h>

#include "ceilab/common/error.hpp"
#include "ceilab/harness/histogram.hpp"

namespace ceilab::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_score(const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(v >= 0.0 && v <= 1.0)) return std::nullopt;
  return v;
}

}  // namespace

std::string describe_state(const world::WorldState& state, const world::Rules& rules) {
  std::string out = fmt::format("agent at ({}, {}); holding", state.agent.x, state.agent.y);
  bool any = false;
  for (std::size_t i = 0; i < state.inventory.size(); ++i) {
    if (state.inventory[i] == 0) continue;
    out += fmt::format(" {}x{}", rules.item_name(static_cast<world::ItemId>(i)), state.inventory[i]);
    any = true;
  }
  if (!any) out += " nothing";
  return out;
}

HumanTeacher::HumanTeacher(const tasks::TaskGraph& graph, std::istream& in, std::ostream& out, bool show_valid)
    : graph_(&graph), in_(&in), out_(&out), show_valid_(show_valid) {}

std::string HumanTeacher::read_line() {
  std::string line;
  if (!std::getline(*in_, line)) throw EndOfInput();
  return trim(line);
}

comms::Feedback HumanTeacher::respond(const comms::TeacherQuery& query) {
  if (query.valid.empty()) throw ProtocolError("teacher asked with an empty valid set");
  auto& out = *out_;
  out << "state: " << describe_state(query.state, graph_->rules()) << '\n';
  out << "current intention: " << graph_->describe(query.current) << '\n';
  if (const auto* verbal = std::get_if<comms::Verbal>(&query.utterance)) {
    out << "learner proposes: " << graph_->describe(verbal->intention) << '\n';
    if (show_valid_) {
      out << "valid:";
      for (auto u : query.valid) out << ' ' << graph_->describe(u);
      out << '\n';
    }
    for (;;) {
      out << "correct intention> " << std::flush;
      const auto line = read_line();
      if (const auto u = graph_->parse_intention(line)) return comms::Instructive{*u, *u == verbal->intention};
      ++rejected_;
      out << "not an intention: '" << line << "'\n";
    }
  }
  const auto& exec = *std::get<comms::Execute>(query.utterance).execution;
  out << fmt::format("learner executed {} primitive steps, ending with {}\n", exec.steps.size(),
                     describe_state(exec.end(), graph_->rules()));
  for (;;) {
    out << "score 0..1> " << std::flush;
    const auto line = read_line();
    if (const auto v = parse_score(line)) return comms::Evaluative{*v};
    ++rejected_;
    out << "not a score in [0, 1]: '" << line << "'\n";
  }
}

SeedRun interactive_teach(const ExperimentConfig& config, std::istream& in, std::ostream& out,
                          const TeachOptions& options) {
  if (config.method != MethodKind::Ceil && config.method != MethodKind::CeilNoJcom) {
    throw ConfigError("interactive teaching needs the ceil or ceil_no_jcom method");
  }
  config.validate();
  const auto env = Environment::load(config);
  const auto seed = options.seed.value_or(config.seeds.front());
  SeedRun run;
  run.method = make_method(config, *env, seed);
  auto& method = static_cast<learner::CeilMethod&>(*run.method);
  if (config.setting != Setting::Scratch) load_pretrained(method, checkpoint_for_seed(config.checkpoint, seed), config);

  HumanTeacher human(env->graph, in, out, options.show_valid);
  method.set_teacher(&human);
  const auto held_out = eval_layouts(config, *env, seed);
  GroupCounter window(env->graph);
  std::int64_t episodes = 0;
  auto record_row = [&] {
    const auto row = snapshot_row(method, episodes, evaluate(method, held_out), window.histogram());
    window.clear();
    run.record.rows.push_back(row);
  };

  record_row();
  while (method.ledger().request_count() < config.budget && (options.episodes == 0 || episodes < options.episodes)) {
    out << fmt::format("== episode {} ({} requests so far) ==\n", episodes + 1, method.ledger().request_count());
    const double spent =
        static_cast<double>(method.ledger().request_count()) / static_cast<double>(config.budget);
    try {
      const auto summary = method.train_episode(training_layout(config, *env, seed, episodes), spent, config.budget);
      window.add(summary.uttered);
      ++episodes;
      out << fmt::format("episode {}: {}\n", episodes, summary.success ? "task done" : "task not done");
    } catch (const EndOfInput&) {
      out << "input ended; stopping\n";
      break;
    }
    if (run.record.rows.back().request_count < method.ledger().request_count()) record_row();
  }
  method.set_teacher(nullptr);

  run.record.method = method.name();
  run.record.seed = seed;
  run.record.config = to_json(config);
  return run;
}

}  // namespace ceilab::harness
