#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "ceilab/common/error.hpp"
#include "ceilab/learner/checkpoint.hpp"
#include "ceilab/learner/episode.hpp"
#include "ceilab/learner/memory.hpp"
#include "ceilab/learner/method.hpp"
#include "ceilab/learner/updates.hpp"
#include "fixtures.hpp"

using namespace ceilab;
using namespace ceilab::learner;
using fixtures::desk;
using fixtures::task;
using tasks::kDo;
using tasks::kDone;
using world::PrimitiveAction;

namespace {

struct Rig {
  world::ChannelMap channels = world::ChannelMap::build(desk().rules(), 6, 6);
  Agent agent;
  tasks::Planner planner{desk()};
  comms::TeacherModel teacher;
  comms::CostLedger ledger;

  explicit Rig(Backend backend = Backend::TabularExact, Hyperparams hp = {}, std::uint64_t seed = 1,
               comms::TeacherVariant variant = comms::TeacherVariant::PerformanceBased)
      : agent(backend, hp, seed),
        teacher(variant, desk(), tasks::AbstractionLevels(desk(), tasks::reference_layout(desk())), seed + 100) {
    agent.bind(desk(), channels);
  }

  EpisodeTrace episode(std::shared_ptr<const world::Layout> layout, const EpisodeOptions& options,
                       const char* main = "BakePork") {
    return run_episode(agent, planner, teacher, ledger, std::move(layout), task(desk(), main), options);
  }
};

/// First action of the planner's shortest plan, Terminate once satisfied.
PrimitiveAction plan_action(tasks::Planner& planner, const world::WorldState& s, tasks::IntentionId task,
                            const world::WorldState& baseline) {
  const auto plan = planner.plan(s, task.task_index(), baseline);
  return plan.actions.empty() ? PrimitiveAction::Terminate : plan.actions.front();
}

std::shared_ptr<const FeatureVec> state_key(std::uint64_t key) {
  return std::make_shared<const FeatureVec>(FeatureVec{{key, 1.0}});
}

void set_q(QFunction& q, std::uint64_t key, int slot, Head head, int column, double value) {
  auto& row = q.row(QFunction::row_key(key, slot, head), head);
  if (row.size() <= static_cast<std::size_t>(column)) row.resize(static_cast<std::size_t>(column) + 1, 0.0);
  row[static_cast<std::size_t>(column)] = value;
}

void set_q(Agent& agent, const world::WorldState& s, tasks::IntentionId current, Head head, int column,
           double value) {
  set_q(agent.q(), agent.encode(s)->front().key, agent.slot_of(current), head, column, value);
}

Transition transition(std::uint64_t s, int action, double reward, std::optional<std::uint64_t> next) {
  Transition t;
  t.obs = state_key(s);
  t.action = action;
  t.reward = reward;
  t.terminal = !next;
  t.next_obs = state_key(next.value_or(s));
  return t;
}

std::vector<const Transition*> pointers(const std::vector<Transition>& ts) {
  std::vector<const Transition*> out;
  for (const auto& t : ts) out.push_back(&t);
  return out;
}

/// Deterministic MDP: next[s][a] (-1 = terminal) and reward[s][a].
struct Mdp {
  std::vector<std::vector<int>> next;
  std::vector<std::vector<double>> reward;
};

std::vector<std::vector<double>> value_iteration(const Mdp& m, double gamma) {
  const auto n = m.next.size();
  const auto actions = m.next[0].size();
  std::vector<std::vector<double>> q(n, std::vector<double>(actions, 0.0));
  for (int it = 0; it < 100'000; ++it) {
    double change = 0.0;
    auto fresh = q;
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t a = 0; a < actions; ++a) {
        double target = m.reward[s][a];
        if (m.next[s][a] >= 0) {
          const auto& nq = q[static_cast<std::size_t>(m.next[s][a])];
          target += gamma * *std::max_element(nq.begin(), nq.end());
        }
        change = std::max(change, std::abs(target - q[s][a]));
        fresh[s][a] = target;
      }
    }
    q = fresh;
    if (change < 1e-13) break;
  }
  return q;
}

Mdp random_mdp(Rng& gen, int states, int actions) {
  Mdp m;
  m.next.assign(static_cast<std::size_t>(states), {});
  m.reward.assign(static_cast<std::size_t>(states), {});
  for (int s = 0; s < states; ++s) {
    for (int a = 0; a < actions; ++a) {
      const bool terminal = gen.bernoulli(0.1);
      m.next[static_cast<std::size_t>(s)].push_back(terminal ? -1 : static_cast<int>(gen.uniform_index(states)));
      m.reward[static_cast<std::size_t>(s)].push_back(-gen.uniform01());
    }
  }
  return m;
}

/// Trains update_rl on every transition of `m` at once and returns the largest
/// gap to the value-iteration solution.
double td_gap(const Mdp& m, double gamma) {
  const int actions = static_cast<int>(m.next[0].size());
  std::vector<int> columns;
  for (int a = 0; a < actions; ++a) columns.push_back(task_column(a));
  std::vector<Transition> ts;
  for (std::size_t s = 0; s < m.next.size(); ++s) {
    for (int a = 0; a < actions; ++a) {
      const int n = m.next[s][static_cast<std::size_t>(a)];
      ts.push_back(transition(1000 + s, task_column(a), m.reward[s][static_cast<std::size_t>(a)],
                              n < 0 ? std::nullopt : std::optional<std::uint64_t>(1000 + n)));
    }
  }
  QFunction q(Backend::TabularExact);
  q.intern("only");
  const auto batch = pointers(ts);
  for (int k = 0; k < 4000; ++k) update_rl(q, batch, columns, gamma, 1.0 / (1.0 + 0.001 * k));
  const auto oracle = value_iteration(m, gamma);
  double gap = 0.0;
  for (std::size_t s = 0; s < m.next.size(); ++s) {
    for (int a = 0; a < actions; ++a) {
      gap = std::max(gap, std::abs(q.value(*state_key(1000 + s), 0, Head::Intention, task_column(a)) -
                                   oracle[s][static_cast<std::size_t>(a)]));
    }
  }
  return gap;
}

std::map<char, int> feedback_counts(const EpisodeTrace& trace) {
  std::map<char, int> counts;
  for (const auto& st : trace.steps) {
    if (const auto* ins = std::get_if<comms::Instructive>(&st.feedback)) {
      ++counts[ins->was_learner_correct ? 'c' : 'i'];
    } else {
      ++counts['e'];
    }
  }
  return counts;
}

}  // namespace

TEST_CASE("stack memory push and pop") {
  const auto bake = task(desk(), "BakePork");
  const auto coal = task(desk(), "GetCoal");
  StackMemory m(bake);
  CHECK(m.contents() == std::vector{bake});
  CHECK(memory_query(m, coal) == coal);
  CHECK(m.contents() == std::vector{bake, coal});
  CHECK(memory_query(m, kDone) == bake);
  CHECK(memory_query(m, kDone) == std::nullopt);
  CHECK(m.empty());
  CHECK_THROWS_AS(m.query(kDone), ProtocolError);
  CHECK_THROWS_AS(m.top(), ProtocolError);
  StackMemory other(bake);
  CHECK_THROWS_AS(other.query(kDo), ProtocolError);
  CHECK_THROWS_AS(StackMemory{kDone}, ProtocolError);
}

TEST_CASE("greedy intention choice and tie-break") {
  Rig rig;
  const auto s = world::initial_state(fixtures::desk_fixture(), desk().rules());
  const auto bake = task(desk(), "BakePork");
  set_q(rig.agent, s, bake, Head::Intention, kDoColumn, 1.0);
  set_q(rig.agent, s, bake, Head::Intention, kDoneColumn, 0.2);
  set_q(rig.agent, s, bake, Head::Intention, rig.agent.column_of(task(desk(), "GetCoal")), 0.5);
  Rng rng(1);
  const auto f = rig.agent.encode(s);
  CHECK(rig.agent.select_intention(*f, bake, 0.0, rng) == kDo);

  const std::vector<double> tie{0.3, 0.7, 0.7, 0.1};
  CHECK(argmax(tie) == 1);
  CHECK(epsilon_greedy(tie, 0.0, rng) == 1);
  const auto before = rng;
  epsilon_greedy(tie, 0.0, rng);
  CHECK(rng == before);
}

TEST_CASE("fully random intention choice is uniform") {
  Rig rig;
  const auto s = world::initial_state(fixtures::desk_fixture(), desk().rules());
  const auto f = rig.agent.encode(s);
  Rng rng(42);
  std::map<tasks::IntentionId, int> counts;
  const int draws = 10'000;
  for (int k = 0; k < draws; ++k) ++counts[rig.agent.select_intention(*f, task(desk(), "BakePork"), 1.0, rng)];
  const double uniform = 1.0 / static_cast<double>(rig.agent.intention_actions().size());
  CHECK(counts.size() == rig.agent.intention_actions().size());
  for (const auto& [u, c] : counts) CHECK(std::abs(static_cast<double>(c) / draws - uniform) <= 0.02);
}

TEST_CASE("execution respects the step cap and Terminate") {
  Hyperparams hp;
  hp.l_max = 1;
  Rig capped(Backend::TabularExact, hp);
  const auto s = world::initial_state(fixtures::desk_fixture(), desk().rules());
  Rng rng(3);
  const auto one = capped.agent.execute(s, task(desk(), "GetWood"), 1.0, rng);
  CHECK(one.steps.size() == 1);
  CHECK(one.steps.back().action == PrimitiveAction::Terminate);

  Rig rig;
  set_q(rig.agent, s, task(desk(), "GetWood"), Head::Primitive, static_cast<int>(PrimitiveAction::Terminate), 1.0);
  const auto stop = rig.agent.execute(s, task(desk(), "GetWood"), 0.0, rng);
  CHECK(stop.steps.size() == 1);
  CHECK(stop.end() == s);
}

TEST_CASE("a converged tabular primitive policy executes in the optimal step count") {
  const auto layout = fixtures::make_layout(
      desk(), {"......", "......", "......", "......", "......", "......"},
      {{"tree", 5, 3}, {"stone", 0, 5}, {"workbench", 5, 0}, {"coal_ore", 3, 5}, {"pig", 0, 0}, {"furnace", 2, 0}},
      {1, 3});
  Rig rig;
  const auto wood = task(desk(), "GetWood");
  const auto start = world::initial_state(layout, desk().rules());
  const auto optimal = rig.planner.plan(start, wood.task_index()).actions.size();
  CHECK(fixtures::bfs_plan_length(start, wood.task_index(), desk().rules()) == static_cast<int>(optimal));
  std::vector<LabeledStep> data;
  Rng rng(5);
  for (int round = 0; round < 200; ++round) {
    const auto exec = rig.agent.execute(start, wood, 0.0, rng);
    for (const auto& st : exec.steps) {
      const auto label = plan_action(rig.planner, st.state, wood, start);
      data.push_back({rig.agent.encode(st.state), rig.agent.slot_of(wood), static_cast<int>(label)});
    }
    std::vector<const LabeledStep*> batch;
    for (const auto& d : data) batch.push_back(&d);
    train_labeled(rig.agent.q(), batch, 1.0, 0.5);
  }
  const auto exec = rig.agent.execute(start, wood, 0.0, rng);
  CHECK(world::is_task_satisfied(start, exec.end(), wood.task_index(), desk().rules()));
  CHECK(exec.steps.size() == optimal + 1);
}

TEST_CASE("an immediate successful DO is one macro step costing one evaluation") {
  Rig rig;
  PolicyHooks hooks;
  hooks.intention = [](const world::WorldState&, tasks::IntentionId, int) { return kDo; };
  const auto bake = task(desk(), "BakePork");
  const auto layout = fixtures::desk_fixture();
  const auto start = world::initial_state(layout, desk().rules());
  hooks.primitive = [&](const world::WorldState& s, tasks::IntentionId cur, int) {
    return plan_action(rig.planner, s, cur, start);
  };
  EpisodeOptions options;
  options.hooks = &hooks;
  const auto trace = rig.episode(layout, options);
  CHECK(trace.steps.size() == 1);
  CHECK(trace.success);
  CHECK(std::holds_alternative<comms::Evaluative>(trace.steps[0].feedback));
  CHECK(rig.ledger.total() == doctest::Approx(0.2));
  CHECK(rig.ledger.total_micro() == 200'000);
  CHECK(trace.steps[0].stack_after.empty());
  CHECK(trace.uttered == std::vector{bake});
}

TEST_CASE("uttering DONE first empties the stack after one correction") {
  Rig rig;
  PolicyHooks hooks;
  hooks.intention = [](const world::WorldState&, tasks::IntentionId, int) { return kDone; };
  EpisodeOptions options;
  options.hooks = &hooks;
  const auto trace = rig.episode(fixtures::desk_fixture(), options);
  REQUIRE(trace.steps.size() == 1);
  const auto fb = std::get<comms::Instructive>(trace.steps[0].feedback);
  CHECK_FALSE(fb.was_learner_correct);
  CHECK(rig.ledger.incorrect_instructive() == 1);
  CHECK(rig.ledger.request_count() == 1);
  CHECK_FALSE(trace.truncated);
  CHECK_FALSE(trace.success);
}

TEST_CASE("a scripted decomposition gets feedback from the planner's valid sets") {
  Rig rig(Backend::TabularExact, {}, 1, comms::TeacherVariant::TopDown);
  const auto& g = desk();
  std::map<tasks::IntentionId, std::vector<tasks::IntentionId>> script{
      {task(g, "BakePork"), {task(g, "GetCoal"), task(g, "HitPig"), kDo}},
      {task(g, "GetCoal"), {task(g, "MakeStonePickaxe"), kDo}},
      {task(g, "MakeStonePickaxe"), {task(g, "GetStone"), task(g, "GetWood"), kDo}},
      {task(g, "GetStone"), {kDo}},
      {task(g, "GetWood"), {kDo}},
      {task(g, "HitPig"), {kDo}}};
  std::map<tasks::IntentionId, std::size_t> cursor;
  std::vector<tasks::IntentionId> expected_utterances;
  PolicyHooks hooks;
  hooks.intention = [&](const world::WorldState&, tasks::IntentionId cur, int) {
    const auto& lines = script.at(cur);
    const auto u = lines[std::min(cursor[cur]++, lines.size() - 1)];
    expected_utterances.push_back(u);
    return u;
  };
  std::vector<world::WorldState> baselines;
  world::WorldState exec_start;
  hooks.primitive = [&](const world::WorldState& s, tasks::IntentionId cur, int step) {
    if (step == 1) exec_start = s;
    return plan_action(rig.planner, s, cur, exec_start);
  };
  EpisodeOptions options;
  options.hooks = &hooks;
  const auto trace = rig.episode(fixtures::desk_fixture(), options);
  CHECK(trace.success);
  CHECK_FALSE(trace.truncated);

  REQUIRE(trace.steps.size() == expected_utterances.size());
  baselines.push_back(trace.initial);
  tasks::Planner oracle(desk());
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const auto& st = trace.steps[k];
    CHECK(st.action == expected_utterances[k]);
    CHECK(st.valid == oracle.valid_next_intentions(st.state, st.intention, baselines.back()));
    if (const auto* ins = std::get_if<comms::Instructive>(&st.feedback)) {
      CHECK(ins->was_learner_correct == st.valid.contains(st.action));
      if (ins->was_learner_correct) CHECK(ins->correct == st.action);
    }
    if (st.action.is_task()) baselines.push_back(st.state);
    else baselines.pop_back();
  }
}

TEST_CASE("one TD step on a terminal transition lands on the reward") {
  QFunction q(Backend::TabularExact);
  q.intern("a");
  const std::vector<int> columns{task_column(0)};
  std::vector<Transition> ts{transition(1, task_column(0), -0.01, std::nullopt)};
  update_rl(q, pointers(ts), columns, 0.9, 1.0);
  CHECK(q.value(*state_key(1), 0, Head::Intention, task_column(0)) == -0.01);
}

TEST_CASE("TD on a two-state chain reaches the Bellman solution") {
  QFunction q(Backend::TabularExact);
  q.intern("a");
  const std::vector<int> columns{task_column(0)};
  std::vector<Transition> ts{transition(1, task_column(0), -0.01, 2), transition(2, task_column(0), -0.2, std::nullopt)};
  for (int k = 0; k < 500; ++k) update_rl(q, pointers(ts), columns, 0.9, 0.5);
  CHECK(std::abs(q.value(*state_key(1), 0, Head::Intention, task_column(0)) - (-0.01 + 0.9 * -0.2)) < 1e-6);
  const auto settled = q;
  update_rl(q, pointers(ts), columns, 0.9, 0.5);
  for (auto key : {1, 2}) {
    CHECK(std::abs(q.value(*state_key(key), 0, Head::Intention, task_column(0)) -
                   settled.value(*state_key(key), 0, Head::Intention, task_column(0))) < 1e-12);
  }
}

TEST_CASE("a zero TD residual leaves the table unchanged") {
  QFunction q(Backend::TabularExact);
  q.intern("a");
  set_q(q, 1, 0, Head::Intention, task_column(0), -0.5);
  const auto before = q;
  std::vector<Transition> ts{transition(1, task_column(0), -0.5, std::nullopt)};
  update_rl(q, pointers(ts), std::vector<int>{task_column(0)}, 0.9, 0.3);
  CHECK(q == before);
}

TEST_CASE("TD matches value iteration on a ten-state deterministic MDP") {
  Mdp m;
  for (int s = 0; s < 10; ++s) {
    m.next.push_back({s == 9 ? -1 : s + 1, s == 0 ? -1 : (s * 3) % 10});
    m.reward.push_back({-0.01 * (s + 1), -0.2});
  }
  CHECK(td_gap(m, 0.9) < 1e-4);
}

TEST_CASE("property: TD converges to value iteration on random MDPs") {
  Rng gen(77);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = random_mdp(gen, 2 + static_cast<int>(gen.uniform_index(49)), 3);
    CHECK(td_gap(m, 0.9) < 1e-4);
  }
}

TEST_CASE("hinge loss examples") {
  const std::vector<int> columns{kDoColumn, kDoneColumn, task_column(0), task_column(1)};
  auto loss_for = [&](double label_value, double competitor, double do_value) {
    QFunction q(Backend::TabularExact);
    q.intern("a");
    q.intern("b");
    set_q(q, 1, 0, Head::Intention, task_column(0), label_value);
    set_q(q, 1, 0, Head::Intention, task_column(1), competitor);
    set_q(q, 1, 0, Head::Intention, kDoColumn, do_value);
    std::vector<Transition> ts{transition(1, task_column(1), -0.01, std::nullopt)};
    ts[0].label = task_column(0);
    const auto before = q;
    const double loss = update_margin(q, pointers(ts), columns, 1.0, 0.1);
    return std::pair{loss, q == before};
  };
  const auto [satisfied, unchanged] = loss_for(2.0, 0.5, 0.0);
  CHECK(satisfied == 0.0);
  CHECK(unchanged);
  CHECK(loss_for(0.5, 1.0, 0.0).first == doctest::Approx(1.5));
  CHECK(loss_for(0.5, 0.2, 5.0).first == doctest::Approx(0.7));
}

TEST_CASE("property: repeated margin updates reach zero hinge loss") {
  Rng gen(12);
  for (int trial = 0; trial < 20; ++trial) {
    QFunction q(Backend::TabularExact);
    for (int s = 0; s < 4; ++s) q.intern("t" + std::to_string(s));
    std::vector<int> columns{kDoColumn, kDoneColumn};
    for (int s = 0; s < 4; ++s) columns.push_back(task_column(s));
    std::vector<Transition> ts;
    for (int k = 0; k < 8; ++k) {
      auto t = transition(static_cast<std::uint64_t>(k), 0, -0.01, std::nullopt);
      t.slot = static_cast<int>(gen.uniform_index(4));
      t.label = columns[1 + gen.uniform_index(columns.size() - 1)];
      for (int c : columns) set_q(q, static_cast<std::uint64_t>(k), t.slot, Head::Intention, c, gen.uniform01() * 3.0);
      ts.push_back(t);
    }
    double loss = 1.0;
    for (int it = 0; it < 10'000 && loss > 0.0; ++it) loss = update_margin(q, pointers(ts), columns, 1.0, 0.1);
    CHECK(loss == 0.0);
    for (const auto& t : ts) {
      std::vector<double> v(columns.size());
      q.values(*t.obs, t.slot, Head::Intention, columns, v);
      std::size_t best = 1;
      for (std::size_t k = 2; k < columns.size(); ++k) {
        if (v[k] > v[best]) best = k;
      }
      CHECK(columns[best] == *t.label);
    }
  }
}

TEST_CASE("self-imitation with a zero score is a bit-exact no-op") {
  Rig rig;
  const auto s = world::initial_state(fixtures::desk_fixture(), desk().rules());
  PrimitiveTrace trace;
  trace.features = {rig.agent.encode(s), rig.agent.encode(s)};
  trace.actions = {PrimitiveAction::Interact, PrimitiveAction::Terminate};
  set_q(rig.agent, s, task(desk(), "GetWood"), Head::Primitive, 0, 0.3);
  const auto before = rig.agent.q();
  CHECK(update_self_imitation(rig.agent.q(), trace, 0, 0.0, 1.0, 0.1) == 0.0);
  CHECK(rig.agent.q() == before);
}

TEST_CASE("self-imitation hinge on a single violated step") {
  QFunction q(Backend::TabularExact);
  q.intern("a");
  set_q(q, 1, 0, Head::Primitive, static_cast<int>(PrimitiveAction::MoveUp), 0.7);
  PrimitiveTrace trace;
  trace.features = {state_key(1)};
  trace.actions = {PrimitiveAction::Interact};
  CHECK(update_self_imitation(q, trace, 0, 1.0, 1.0, 0.1) == doctest::Approx(1.7));
  CHECK(q.value(*state_key(1), 0, Head::Primitive, static_cast<int>(PrimitiveAction::Interact)) > 0.0);
}

TEST_CASE("only successful executions move the primitive head") {
  PrimitiveTrace trace;
  trace.features = {state_key(1), state_key(2)};
  trace.actions = {PrimitiveAction::MoveLeft, PrimitiveAction::Terminate};
  QFunction q(Backend::TabularExact);
  q.intern("a");
  const auto before = q;
  update_self_imitation(q, trace, 0, 0.0, 1.0, 0.1);
  update_self_imitation(q, trace, 0, 0.0, 1.0, 0.1);
  CHECK(q == before);
  update_self_imitation(q, trace, 0, 1.0, 1.0, 0.1);
  CHECK_FALSE(q == before);
}

TEST_CASE("loop erasure keeps the direct path") {
  Rig rig;
  const auto s = world::initial_state(fixtures::desk_fixture(), desk().rules());
  comms::Execution exec;
  PrimitiveTrace trace;
  auto cur = s;
  for (auto a : {PrimitiveAction::MoveUp, PrimitiveAction::MoveDown, PrimitiveAction::Interact,
                 PrimitiveAction::Terminate}) {
    exec.steps.push_back({cur, a});
    trace.features.push_back(rig.agent.encode(cur));
    trace.actions.push_back(a);
    if (a != PrimitiveAction::Terminate) world::apply(cur, a, desk().rules());
  }
  const auto erased = erase_loops(exec, trace);
  CHECK(erased->actions == std::vector{PrimitiveAction::Interact, PrimitiveAction::Terminate});
  const auto joined = concatenate({erased, erased});
  CHECK(joined->actions == std::vector{PrimitiveAction::Interact, PrimitiveAction::Interact,
                                       PrimitiveAction::Terminate});
  trace.actions.pop_back();
  CHECK_THROWS_AS(erase_loops(exec, trace), ProtocolError);
}

TEST_CASE("property: protocol discipline over random-policy episodes") {
  Hyperparams hp;
  hp.l_max = 20;
  Rig rig(Backend::TabularFactored, hp, 9);
  Rng gen(4);
  for (int ep = 0; ep < 300; ++ep) {
    EpisodeOptions options;
    options.epsilon = 1.0;
    const auto before = rig.ledger;
    const auto trace = rig.episode(fixtures::generated(desk(), gen.next()), options);
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
      const auto& st = trace.steps[k];
      auto expected = st.stack_before;
      if (st.action.is_task()) {
        CHECK(st.next_state == st.state);
        expected.push_back(st.action);
      } else {
        if (st.action.is_done()) CHECK(st.next_state == st.state);
        expected.pop_back();
      }
      CHECK(st.stack_after == expected);
      const bool last = k + 1 == trace.steps.size();
      if (!last) CHECK_FALSE(st.stack_after.empty());
      if (last) CHECK(st.stack_after.empty() != trace.truncated);
    }
    const auto counts = feedback_counts(trace);
    std::int64_t expected_micro = 0;
    for (const auto& [kind, n] : counts) {
      expected_micro += n * (kind == 'c' ? 10'000 : kind == 'i' ? 50'000 : 200'000);
    }
    CHECK(trace.cost_micro == expected_micro);
    CHECK(rig.ledger.total_micro() - before.total_micro() == expected_micro);
    CHECK(trace.total_reward == -static_cast<double>(expected_micro) / comms::CostLedger::kMicro);
    CHECK(trace.requests == rig.ledger.request_count() - before.request_count());
  }
}

TEST_CASE("replay transitions carry non-positive rewards and end at the empty stack") {
  Hyperparams hp;
  hp.l_max = 10;
  Rig rig(Backend::TabularFactored, hp, 2);
  EpisodeOptions options;
  options.epsilon = 1.0;
  const auto trace = rig.episode(fixtures::desk_fixture(), options);
  const auto& items = rig.agent.replay().items();
  REQUIRE(items.size() == trace.steps.size());
  for (std::size_t k = 0; k < items.size(); ++k) {
    CHECK(items[k].reward <= 0.0);
    CHECK(items[k].terminal == (k + 1 == items.size() && !trace.truncated));
  }
}

TEST_CASE("property: same seeds give identical episode traces") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Hyperparams hp;
    hp.l_max = 30;
    Rig a(Backend::TabularFactored, hp, seed);
    Rig b(Backend::TabularFactored, hp, seed);
    for (int ep = 0; ep < 5; ++ep) {
      EpisodeOptions options;
      options.epsilon = 0.5;
      const auto layout = fixtures::generated(desk(), seed * 10 + static_cast<std::uint64_t>(ep));
      const auto ta = a.episode(layout, options);
      const auto tb = b.episode(layout, options);
      REQUIRE(ta.steps.size() == tb.steps.size());
      for (std::size_t k = 0; k < ta.steps.size(); ++k) {
        CHECK(ta.steps[k].action == tb.steps[k].action);
        CHECK(ta.steps[k].feedback == tb.steps[k].feedback);
        CHECK(ta.steps[k].next_state == tb.steps[k].next_state);
      }
      CHECK(ta.uttered == tb.uttered);
    }
    CHECK(a.ledger == b.ledger);
  }
}

TEST_CASE("replay ring stays bounded and samples reproducibly") {
  Ring<int> ring(5);
  for (int k = 0; k < 12; ++k) {
    ring.push(k);
    CHECK(ring.size() <= 5);
  }
  std::vector<int> kept(ring.items().begin(), ring.items().end());
  std::sort(kept.begin(), kept.end());
  CHECK(kept == std::vector{7, 8, 9, 10, 11});
  Rng r1(3), r2(3);
  const auto s1 = ring.sample(20, r1);
  const auto s2 = ring.sample(20, r2);
  for (std::size_t k = 0; k < s1.size(); ++k) CHECK(*s1[k] == *s2[k]);
  Ring<int> empty(3);
  Rng r3(1);
  CHECK(empty.sample(4, r3).empty());
}

TEST_CASE("hyperparameter validation and config round trip") {
  Hyperparams hp;
  hp.lambda = 0.5;
  hp.lr = 0.2;
  CHECK(hyperparams_from_json(to_json(hp)) == hp);
  CHECK_THROWS_AS(hyperparams_from_json({{"gamma", 0.0}}), ConfigError);
  CHECK_THROWS_AS(hyperparams_from_json({{"eps_start", 1.5}}), ConfigError);
  CHECK_THROWS_AS(hyperparams_from_json({{"momentum", 0.9}}), ConfigError);
  CHECK(hp.epsilon(0.0) == hp.eps_start);
  CHECK(hp.epsilon(1.0) == doctest::Approx(hp.eps_end));
  CHECK(Hyperparams{}.effective_lr(Backend::Linear) == 5e-5);
  CHECK(Hyperparams{}.effective_lr(Backend::TabularExact) == 0.1);
}

TEST_CASE("checkpoints restore values, hyperparameters and rng state") {
  Hyperparams hp;
  hp.l_max = 15;
  Rig rig(Backend::TabularFactored, hp, 6);
  EpisodeOptions options;
  options.epsilon = 1.0;
  for (int k = 0; k < 3; ++k) rig.episode(fixtures::generated(desk(), 50 + static_cast<std::uint64_t>(k)), options);
  const auto batch = rig.agent.replay().sample(32, rig.agent.rng());
  train_step(rig.agent.q(), batch, rig.agent.intention_columns(), TrainOptions{});
  const auto path = std::filesystem::temp_directory_path() / "ceilab_checkpoint_test.json";
  save_checkpoint(path, rig.agent, "ceil", {{"note", 1}});
  const auto ckpt = load_checkpoint(path);
  std::filesystem::remove(path);
  CHECK(ckpt.method == "ceil");
  CHECK(ckpt.extra["note"] == 1);
  Rig other(Backend::TabularFactored, {}, 99);
  restore(other.agent, ckpt);
  CHECK(other.agent.q() == rig.agent.q());
  CHECK(other.agent.hyperparams() == rig.agent.hyperparams());
  CHECK(other.agent.rng() == rig.agent.rng());
  Rig linear(Backend::Linear);
  CHECK_THROWS_AS(restore(linear.agent, ckpt), ConfigError);
  CHECK_THROWS_AS(checkpoint_from_json({{"format", "other"}}), ParseError);
}

TEST_CASE("extending the intention set keeps learned values and starts new ids at zero") {
  Rig rig;
  const auto s = world::initial_state(fixtures::desk_fixture(), desk().rules());
  const auto coal = task(desk(), "GetCoal");
  set_q(rig.agent, s, coal, Head::Intention, kDoColumn, 0.75);
  const auto f = rig.agent.encode(s);
  const int old_slot = rig.agent.slot_of(coal);

  const auto& full = fixtures::minecraft();
  const auto channels = world::ChannelMap::build(full.rules(), 6, 6);
  rig.agent.bind(full, channels);
  const auto coal_full = fixtures::task(full, "GetCoal");
  CHECK(rig.agent.slot_of(coal_full) == old_slot);
  CHECK(rig.agent.q().value(*f, old_slot, Head::Intention, kDoColumn) == 0.75);
  const int silver = rig.agent.slot_of(fixtures::task(full, "SmeltSilver"));
  CHECK(silver >= desk().size());
  CHECK(rig.agent.q().value(*f, silver, Head::Intention, kDoColumn) == 0.0);
  CHECK(rig.agent.intention_actions().size() == static_cast<std::size_t>(full.size() + 2));
}

TEST_CASE("factored features: direction codes and constant mass") {
  using world::Cell;
  CHECK(FactoredFeaturizer::direction_code({2, 2}, std::nullopt) == 0);
  CHECK(FactoredFeaturizer::direction_code({2, 2}, Cell{2, 2}) == 1);
  CHECK(FactoredFeaturizer::direction_code({2, 2}, Cell{3, 2}) == 1);
  CHECK(FactoredFeaturizer::direction_code({2, 2}, Cell{2, 0}) == 2);
  CHECK(FactoredFeaturizer::direction_code({2, 2}, Cell{4, 4}) == 5);
  CHECK(FactoredFeaturizer::direction_code({2, 2}, Cell{0, 2}) == 8);
  const auto channels = world::ChannelMap::build(desk().rules(), 6, 6);
  const FactoredFeaturizer f(channels);
  const auto s = world::initial_state(fixtures::desk_fixture(), desk().rules());
  const auto a = f.encode(world::observe(s, desk().rules(), channels));
  CHECK(a == f.encode(world::observe(s, desk().rules(), channels)));
  double mass = 0.0;
  for (const auto& x : a) mass += x.value;
  CHECK(mass == doctest::Approx(1.0));
  CHECK(a.size() == 2 * desk().entities().size() + 2);
}

TEST_CASE("backend names") {
  for (auto b : {Backend::TabularExact, Backend::TabularFactored, Backend::Linear}) {
    CHECK(backend_from_string(to_string(b)) == b);
  }
  CHECK_THROWS_AS(backend_from_string("cnn"), ConfigError);
}
