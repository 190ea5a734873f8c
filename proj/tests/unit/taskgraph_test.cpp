#include <doctest.h>

#include <set>

#include "ceilab/common/error.hpp"
#include "ceilab/common/random.hpp"
#include "ceilab/taskgraph/abstraction.hpp"
#include "ceilab/taskgraph/planner.hpp"
#include "fixtures.hpp"

using namespace ceilab;
using namespace ceilab::tasks;
using fixtures::desk;
using fixtures::task;
using world::PrimitiveAction;

namespace {

const char* kTwoTasks = R"({
  "tasks": [
    {"id": "GetWood", "name": "get wood", "required_items": {}, "workstation": "tree",
     "produced_item": "wood", "parents": ["MakePlank"]},
    {"id": "MakePlank", "name": "make plank", "required_items": {"wood": 1}, "workstation": null,
     "produced_item": "plank", "parents": []}
  ]
})";

/// Chain T0 <- T1 <- ... <- T{n-1}, each producing one item from the previous.
std::string chain_graph(int n) {
  nlohmann::json tasks = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    nlohmann::json t = {{"id", "T" + std::to_string(i)},
                        {"name", "t" + std::to_string(i)},
                        {"workstation", "bench"},
                        {"produced_item", "i" + std::to_string(i)},
                        {"parents", nlohmann::json::array()}};
    t["required_items"] = nlohmann::json::object();
    if (i > 0) t["required_items"]["i" + std::to_string(i - 1)] = 1;
    if (i + 1 < n) t["parents"].push_back("T" + std::to_string(i + 1));
    tasks.push_back(t);
  }
  return nlohmann::json{{"tasks", tasks}}.dump();
}

}  // namespace

TEST_CASE("a two-task graph loads with the parent as root") {
  const auto g = load_graph(kTwoTasks);
  CHECK(g.size() == 2);
  REQUIRE(g.roots().size() == 1);
  CHECK(g.task(g.roots()[0]).id == "MakePlank");
  CHECK(g.task(g.index_of("GetWood")).leaf);
  CHECK_FALSE(g.task(g.index_of("MakePlank")).leaf);
}

TEST_CASE("mutual parents are a cycle") {
  auto j = nlohmann::json::parse(kTwoTasks);
  j["tasks"][1]["parents"] = {"GetWood"};
  j["tasks"][1]["required_items"] = {{"wood", 1}};
  j["tasks"][0]["required_items"] = {{"plank", 1}};
  CHECK_THROWS_WITH_AS(load_graph(j.dump()), doctest::Contains("cycle"), GraphError);
}

TEST_CASE("required items must match what the children produce") {
  auto j = nlohmann::json::parse(kTwoTasks);
  j["tasks"][1]["required_items"] = {{"wood", 1}, {"stone", 1}};
  CHECK_THROWS_WITH_AS(load_graph(j.dump()), doctest::Contains("mismatch"), GraphError);
}

TEST_CASE("loader rejects unknown fields, reserved ids and bad text") {
  auto unknown = nlohmann::json::parse(kTwoTasks);
  unknown["tasks"][0]["colour"] = "brown";
  CHECK_THROWS_AS(load_graph(unknown.dump()), ParseError);
  auto reserved = nlohmann::json::parse(kTwoTasks);
  reserved["tasks"][0]["id"] = "DONE";
  reserved["tasks"][1]["parents"] = nlohmann::json::array();
  CHECK_THROWS(load_graph(reserved.dump()));
  CHECK_THROWS_AS(load_graph("{ not json"), ParseError);
  auto orphan = nlohmann::json::parse(kTwoTasks);
  orphan["tasks"][0]["parents"] = {"Nowhere"};
  CHECK_THROWS_AS(load_graph(orphan.dump()), GraphError);
}

TEST_CASE("the bundled desk graph has the expected hierarchy") {
  const auto& g = desk();
  const auto bake = g.index_of("BakePork");
  CHECK(g.is_root(bake));
  for (const char* id : {"GetCoal", "MakeStonePickaxe", "GetStone"}) CHECK(g.is_descendant(g.index_of(id), bake));
  CHECK_FALSE(g.is_descendant(bake, g.index_of("GetStone")));
  CHECK_THROWS_AS(g.index_of("MakeCake"), GraphError);
}

TEST_CASE("the bundled full graph shares subtasks between its roots") {
  const auto& g = fixtures::minecraft();
  const auto pork = g.index_of("BakePork");
  const auto beef = g.index_of("BakeBeef");
  const auto silver = g.index_of("SmeltSilver");
  for (auto r : {pork, beef, silver}) CHECK(g.is_root(r));
  for (const char* id : {"GetCoal", "MakeStonePickaxe", "GetStone", "GetWood"}) {
    CHECK(g.is_descendant(g.index_of(id), pork));
    CHECK(g.is_descendant(g.index_of(id), beef));
  }
  for (const char* id : {"GetIron", "MakeArrow", "HitPig"}) CHECK(g.find(id));
}

TEST_CASE("graph text round trip") {
  const auto again = load_graph(desk().to_json().dump());
  CHECK(again.to_json() == desk().to_json());
}

TEST_CASE("intention parsing and reserved symbols") {
  CHECK(desk().parse_intention("DO") == kDo);
  CHECK(desk().parse_intention("DONE") == kDone);
  CHECK(desk().parse_intention("GetCoal") == task(desk(), "GetCoal"));
  CHECK_FALSE(desk().parse_intention("xyz"));
  for (int t = 0; t < desk().size(); ++t) {
    CHECK(IntentionId::task(t) != kDo);
    CHECK(IntentionId::task(t) != kDone);
  }
}

TEST_CASE("one-step plan next to a tree") {
  Planner planner(desk());
  const auto s = world::initial_state(fixtures::desk_fixture(), desk().rules());
  const auto p = planner.plan(s, desk().index_of("GetWood"));
  CHECK(p.actions == std::vector<PrimitiveAction>{PrimitiveAction::Interact});
  CHECK(p.first_event == desk().index_of("GetWood"));
}

TEST_CASE("straight-line approach matches the search oracle") {
  const auto layout = fixtures::make_layout(desk(), {"......"}, {{"tree", 4, 0}}, {0, 0});
  const auto s = world::initial_state(layout, desk().rules());
  Planner planner(desk());
  const auto p = planner.plan(s, desk().index_of("GetWood"));
  CHECK(static_cast<int>(p.actions.size()) == fixtures::bfs_plan_length(s, desk().index_of("GetWood"), desk().rules()));
  CHECK(p.actions.size() == 4);
}

TEST_CASE("plan execution completes the task in the simulator") {
  Planner planner(desk());
  const auto s = world::initial_state(fixtures::desk_fixture(), desk().rules());
  for (TaskIndex t = 0; t < desk().size(); ++t) {
    auto cur = s;
    for (auto a : planner.plan(s, t).actions) world::apply(cur, a, desk().rules());
    CHECK(world::is_task_satisfied(s, cur, t, desk().rules()));
  }
}

TEST_CASE("a consumed raw entity makes its task unreachable") {
  Planner planner(desk());
  auto s = world::initial_state(fixtures::desk_fixture(), desk().rules());
  s.alive[0] = false;
  CHECK_THROWS_AS(planner.plan(s, desk().index_of("GetWood")), UnreachableError);
  CHECK_FALSE(planner.try_plan(s, desk().index_of("MakeStonePickaxe")));
}

TEST_CASE("a satisfied task has an empty plan relative to its baseline") {
  Planner planner(desk());
  const auto s = world::initial_state(fixtures::desk_fixture(), desk().rules());
  const auto after = world::step(s, PrimitiveAction::Interact, desk().rules());
  CHECK(planner.plan(after, desk().index_of("GetWood"), s).actions.empty());
}

TEST_CASE("property: plan lengths equal exhaustive search") {
  Planner planner(desk());
  Rng gen(31);
  for (int k = 0; k < 6; ++k) {
    const auto layout = fixtures::generated(desk(), gen.next());
    auto s = world::initial_state(layout, desk().rules());
    const auto walk = gen.uniform_index(8);
    for (std::uint64_t i = 0; i < walk; ++i) world::apply(s, world::kWorldActions[gen.uniform_index(5)], desk().rules());
    for (TaskIndex t = 0; t < desk().size(); ++t) {
      const auto oracle = fixtures::bfs_plan_length(s, t, desk().rules());
      const auto found = planner.try_plan(s, t);
      REQUIRE(found.has_value() == oracle.has_value());
      if (oracle) CHECK(static_cast<int>(found->actions.size()) == *oracle);
    }
  }
}

TEST_CASE("abstraction level of a leaf reachable in one step is 1") {
  const AbstractionLevels levels(desk(), *fixtures::desk_fixture());
  CHECK(levels.level(desk().index_of("GetWood")) == 1);
}

TEST_CASE("abstraction level of a two-leaf parent matches search") {
  const auto layout = fixtures::make_layout(desk(), {"..........", ".........."},
                                            {{"stone", 0, 0},
                                             {"workbench", 5, 0},
                                             {"tree", 9, 0},
                                             {"pig", 0, 1},
                                             {"furnace", 3, 1},
                                             {"coal_ore", 9, 1}},
                                            {4, 0});
  const auto s = world::initial_state(layout, desk().rules());
  const AbstractionLevels levels(desk(), *layout);
  CHECK(levels.level(desk().index_of("GetStone")) == 4);
  CHECK(levels.level(desk().index_of("GetWood")) == 5);
  const auto pickaxe = desk().index_of("MakeStonePickaxe");
  CHECK(levels.level(pickaxe) == fixtures::bfs_plan_length(s, pickaxe, desk().rules()));
  CHECK(levels.level(pickaxe) >= 10);
}

TEST_CASE("property: levels strictly decrease along every edge") {
  for (const auto* g : {&desk(), &fixtures::minecraft()}) {
    const int size = g == &desk() ? 6 : 10;
    const AbstractionLevels levels(*g, reference_layout(*g, size, size));
    for (TaskIndex t = 0; t < g->size(); ++t) {
      for (TaskIndex c : g->children(t)) CHECK(levels.level(t) > levels.level(c));
    }
  }
}

TEST_CASE("level groups follow the root distance") {
  const auto& g = desk();
  CHECK(level_group(g, g.index_of("BakePork")) == LevelGroup::IV);
  CHECK(level_group(g, g.index_of("GetCoal")) == LevelGroup::III);
  CHECK(level_group(g, g.index_of("MakeStonePickaxe")) == LevelGroup::II);
  CHECK(level_group(g, g.index_of("GetStone")) == LevelGroup::I);
  std::set<LevelGroup> seen;
  for (TaskIndex t = 0; t < g.size(); ++t) seen.insert(level_group(g, t));
  CHECK(seen.size() == 4);

  const auto chain = load_graph(chain_graph(5));
  CHECK(level_group(chain, chain.index_of("T0")) == LevelGroup::I);
  CHECK(level_group(chain, chain.index_of("T4")) == LevelGroup::IV);
}

TEST_CASE("valid next intentions: the chain down to the first leaf plus DO") {
  const auto layout = fixtures::make_layout(
      desk(), {"........"},
      {{"pig", 0, 0}, {"furnace", 1, 0}, {"coal_ore", 3, 0}, {"workbench", 4, 0}, {"stone", 6, 0}, {"tree", 7, 0}},
      {5, 0});
  const auto s = world::initial_state(layout, desk().rules());
  Planner planner(desk());
  const auto valid = planner.valid_next_intentions(s, task(desk(), "BakePork"), s);
  const std::set<IntentionId> expected{task(desk(), "GetCoal"), task(desk(), "MakeStonePickaxe"),
                                       task(desk(), "GetStone"), kDo};
  CHECK(valid == expected);
}

TEST_CASE("valid next intentions of a leaf and of a satisfied task") {
  Planner planner(desk());
  const auto s = world::initial_state(fixtures::desk_fixture(), desk().rules());
  CHECK(planner.valid_next_intentions(s, task(desk(), "GetWood"), s) == std::set<IntentionId>{kDo});
  const auto after = world::step(s, PrimitiveAction::Interact, desk().rules());
  CHECK(planner.valid_next_intentions(after, task(desk(), "GetWood"), s) == std::set<IntentionId>{kDone});
}

TEST_CASE("property: valid set is non-empty and below the current task") {
  Planner planner(desk());
  Rng gen(8);
  for (int k = 0; k < 200; ++k) {
    const auto layout = fixtures::generated(desk(), gen.next());
    auto s = world::initial_state(layout, desk().rules());
    const auto baseline = s;
    const auto walk = gen.uniform_index(12);
    for (std::uint64_t i = 0; i < walk; ++i) world::apply(s, world::kWorldActions[gen.uniform_index(5)], desk().rules());
    const auto current = IntentionId::task(static_cast<TaskIndex>(gen.uniform_index(desk().size())));
    std::set<IntentionId> valid;
    try {
      valid = planner.valid_next_intentions(s, current, baseline);
    } catch (const UnreachableError&) {
      continue;
    }
    CHECK_FALSE(valid.empty());
    for (auto v : valid) {
      if (v.is_task()) CHECK(desk().is_descendant(v.task_index(), current.task_index()));
    }
  }
}
