#include "doctest.h"
#include "workstate/planner.hpp"

using namespace workstate;

namespace {

const std::set<std::string> kTools{"calc", "kvstore", "echo", "flaky"};

Task plain_task(int n) {
  Task t;
  t.id = "t";
  for (int i = 1; i <= n; ++i) {
    SubgoalSpec s;
    s.id = "s" + std::to_string(i);
    s.description = "step " + std::to_string(i);
    t.subgoals.push_back(s);
  }
  return t;
}

Plan failed_plan(bool with_fallback) {
  Plan plan{"t", 1, {}};
  Subtask a;
  a.id = "s1";
  a.tool = "calc";
  a.args = {{"expr", "1+1"}};
  a.status = SubtaskStatus::Done;
  Subtask b;
  b.id = "s2";
  b.tool = "flaky";
  b.depends_on = {"s1"};
  b.status = SubtaskStatus::Failed;
  b.estimated_steps = 3;
  if (with_fallback) b.fallback_tool = "echo";
  plan.subtasks = {a, b};
  return plan;
}

}  // namespace

TEST_CASE("plan: defaults with a fresh strategy") {
  RulePlanner planner(kTools);
  const Plan plan = planner.propose_plan(plain_task(3), StrategyState{});
  CHECK(plan.version == 1);
  REQUIRE(plan.subtasks.size() == 3);
  for (const auto& st : plan.subtasks) {
    CHECK(st.estimated_steps == 3);
    CHECK(st.tool == "echo");
    CHECK(st.status == SubtaskStatus::Pending);
  }
  CHECK(plan.subtasks[2].id == "s3");
}

TEST_CASE("plan: keyword binding and hints") {
  CHECK(bind_tool_by_keyword("compute route cost") == "calc");
  CHECK(bind_tool_by_keyword("Calculate totals") == "calc");
  CHECK(bind_tool_by_keyword("save the result") == "kvstore");
  CHECK(bind_tool_by_keyword("FETCH a record") == "kvstore");
  CHECK(bind_tool_by_keyword("store it") == "kvstore");
  CHECK(bind_tool_by_keyword("say hello") == "echo");

  Task t = plain_task(2);
  t.subgoals[0].description = "compute route cost";
  t.subgoals[1].tool_hint = "flaky";
  t.subgoals[1].depends_on = {"s1"};
  RulePlanner planner(kTools);
  const Plan plan = planner.propose_plan(t, StrategyState{});
  CHECK(plan.subtasks[0].tool == "calc");
  CHECK(plan.subtasks[1].tool == "flaky");
  CHECK(plan.subtasks[1].depends_on == std::vector<std::string>{"s1"});

  t.subgoals[1].tool_hint = "teleport";
  CHECK_THROWS_AS(planner.propose_plan(t, StrategyState{}), UnknownTool);
}

TEST_CASE("plan: step estimate rounds half to even and clamps") {
  CHECK(estimate_steps(4.4, 8) == 4);
  CHECK(estimate_steps(2.5, 8) == 2);
  CHECK(estimate_steps(3.5, 8) == 4);
  CHECK(estimate_steps(0.2, 8) == 1);
  CHECK(estimate_steps(12.0, 8) == 8);

  StrategyState s;
  s.tool_step_estimate["calc"] = 4.4;
  Task t = plain_task(1);
  t.subgoals[0].description = "compute";
  CHECK(RulePlanner(kTools).propose_plan(t, s).subtasks[0].estimated_steps == 4);
  CHECK(RulePlanner(kTools, 3).propose_plan(t, s).subtasks[0].estimated_steps == 3);
}

TEST_CASE("plan is a pure function of its inputs") {
  StrategyState s;
  s.tool_step_estimate["echo"] = 1.7;
  RulePlanner planner(kTools);
  CHECK(planner.propose_plan(plain_task(4), s) == planner.propose_plan(plain_task(4), s));
}

TEST_CASE("revise: fallback rebinding against a hand-built expected plan") {
  const Plan before = failed_plan(true);
  const auto outcome = RulePlanner(kTools).propose_revision(before, FailureContext{"s2", "transient", 3, 2},
                                                            StrategyState{});
  REQUIRE(std::holds_alternative<RevisedPlan>(outcome));
  const auto& revised = std::get<RevisedPlan>(outcome);

  Plan expected = before;
  expected.version = 2;
  expected.subtasks[1].tool = "echo";
  expected.subtasks[1].status = SubtaskStatus::Pending;
  expected.subtasks[1].fallback_tool.reset();
  CHECK(revised.plan.subtasks[1].tool == "echo");
  CHECK(revised.plan.subtasks[1].status == SubtaskStatus::Pending);
  CHECK(revised.plan.version == 2);
  CHECK(revised.plan.subtasks[0] == before.subtasks[0]);
  CHECK(revised.plan.subtasks[1].depends_on == expected.subtasks[1].depends_on);
  CHECK(revised.plan.subtasks[1].args == expected.subtasks[1].args);
  CHECK(revised.changed_subtasks == std::vector<std::string>{"s2"});
  CHECK_FALSE(validate_plan(revised.plan).has_value());
}

TEST_CASE("revise: abort without a fallback and unknown subtask") {
  RulePlanner planner(kTools);
  const auto outcome = planner.propose_revision(failed_plan(false), FailureContext{"s2", "transient", 1, 0},
                                                StrategyState{});
  REQUIRE(std::holds_alternative<AbortTask>(outcome));
  CHECK(std::get<AbortTask>(outcome).reason == "no fallback for s2");
  CHECK_THROWS_AS(planner.propose_revision(failed_plan(true), FailureContext{"zz", "x", 1, 0}, StrategyState{}),
                  UnknownSubtask);
}

TEST_CASE("revise: a consumed fallback is not reused") {
  RulePlanner planner(kTools);
  const auto first = planner.propose_revision(failed_plan(true), FailureContext{"s2", "transient", 1, 0},
                                              StrategyState{});
  Plan again = std::get<RevisedPlan>(first).plan;
  again.subtasks[1].status = SubtaskStatus::Failed;
  const auto second = planner.propose_revision(again, FailureContext{"s2", "transient", 1, 0}, StrategyState{});
  CHECK(std::holds_alternative<AbortTask>(second));
}
