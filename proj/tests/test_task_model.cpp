#include "doctest.h"
#include "workstate/task_model.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

using namespace workstate;

namespace {

Plan make_plan(std::vector<std::pair<std::string, std::vector<std::string>>> nodes) {
  Plan plan{"t", 1, {}};
  for (auto& [id, deps] : nodes) {
    Subtask st;
    st.id = id;
    st.tool = "echo";
    st.depends_on = deps;
    plan.subtasks.push_back(std::move(st));
  }
  return plan;
}

bool is_topological(const Plan& plan, const std::vector<std::string>& order) {
  if (order.size() != plan.subtasks.size()) return false;
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!pos.emplace(order[i], i).second) return false;
  }
  for (const auto& st : plan.subtasks) {
    if (!pos.contains(st.id)) return false;
    for (const auto& d : st.depends_on) {
      if (pos.at(d) >= pos.at(st.id)) return false;
    }
  }
  return true;
}

// Every permutation, filtered to the valid topological orders.
std::vector<std::vector<std::string>> all_topological_orders(const Plan& plan) {
  std::vector<std::string> ids;
  for (const auto& st : plan.subtasks) ids.push_back(st.id);
  std::sort(ids.begin(), ids.end());
  std::vector<std::vector<std::string>> valid;
  do {
    if (is_topological(plan, ids)) valid.push_back(ids);
  } while (std::next_permutation(ids.begin(), ids.end()));
  return valid;
}

}  // namespace

TEST_CASE("validate_plan examples") {
  CHECK(validate_plan(Plan{"t", 1, {}}) == PlanError{plan_error::EmptyPlan{}});
  CHECK(validate_plan(make_plan({{"a", {"b"}}, {"b", {"a"}}})) ==
        PlanError{plan_error::CyclicDependency{{"a", "b"}}});
  CHECK(validate_plan(make_plan({{"a", {}}, {"c", {"ghost"}}})) ==
        PlanError{plan_error::UnknownDependency{"c", "ghost"}});
  CHECK(validate_plan(make_plan({{"a", {}}, {"a", {}}})) == PlanError{plan_error::DuplicateId{"a"}});
  CHECK(validate_plan(make_plan({{"c", {"b"}}, {"b", {"a"}}, {"a", {"c"}}})) ==
        PlanError{plan_error::CyclicDependency{{"a", "c", "b"}}});
  CHECK(validate_plan(make_plan({{"a", {"a"}}})) == PlanError{plan_error::CyclicDependency{{"a"}}});
  CHECK_FALSE(validate_plan(make_plan({{"a", {}}, {"b", {"a"}}})).has_value());
  CHECK(describe(PlanError{plan_error::CyclicDependency{{"a", "b"}}}) == "CyclicDependency([a, b])");
}

TEST_CASE("ready_set examples") {
  auto plan = make_plan({{"x", {}}, {"y", {}}, {"z", {}}});
  CHECK(ready_set(plan) == std::vector<std::string>{"x", "y", "z"});

  plan = make_plan({{"a", {}}, {"b", {"a"}}});
  plan.subtasks[0].status = SubtaskStatus::Done;
  CHECK(ready_set(plan) == std::vector<std::string>{"b"});

  plan.subtasks[0].status = SubtaskStatus::Failed;
  CHECK(ready_set(plan).empty());
  plan.subtasks[0].status = SubtaskStatus::Skipped;
  CHECK(ready_set(plan).empty());
}

TEST_CASE("topological_order examples") {
  CHECK(topological_order(make_plan({{"d", {"b", "c"}}, {"b", {"a"}}, {"c", {"a"}}, {"a", {}}})) ==
        std::vector<std::string>{"a", "b", "c", "d"});
  CHECK(topological_order(make_plan({{"x", {}}})) == std::vector<std::string>{"x"});
  CHECK(topological_order(make_plan({{"c3", {"c2"}}, {"c2", {"c1"}}, {"c1", {}}})) ==
        std::vector<std::string>{"c1", "c2", "c3"});
  // Lexicographic tie-break applies only among available ids.
  CHECK(topological_order(make_plan({{"a", {"z"}}, {"z", {}}, {"m", {}}})) ==
        std::vector<std::string>{"m", "z", "a"});
}

TEST_CASE("property: topological_order is the least valid order on random small DAGs") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 7);
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
    std::shuffle(names.begin(), names.end(), rng);  // edge direction independent of id order
    std::vector<std::pair<std::string, std::vector<std::string>>> nodes;
    for (int i = 0; i < n; ++i) {
      std::vector<std::string> deps;
      for (int j = 0; j < i; ++j) {
        if (rng() % 3 == 0) deps.push_back(names[j]);
      }
      nodes.emplace_back(names[i], deps);
    }
    const Plan plan = make_plan(nodes);
    REQUIRE_FALSE(validate_plan(plan).has_value());
    const auto order = topological_order(plan);
    const auto valid = all_topological_orders(plan);
    CHECK(is_topological(plan, order));
    CHECK(order == valid.front());
  }
}

TEST_CASE("property: ready_set only contains pending subtasks and shrinks as failures grow") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto plan0 = make_plan({{"a", {}}, {"b", {"a"}}, {"c", {"a"}}, {"d", {"b", "c"}}, {"e", {}}});
    Plan plan = plan0;
    for (auto& st : plan.subtasks) {
      st.status = static_cast<SubtaskStatus>(rng() % 6);
    }
    const auto ready = ready_set(plan);
    for (const auto& id : ready) CHECK(plan.find(id)->status == SubtaskStatus::Pending);

    Plan worse = plan;
    for (auto& st : worse.subtasks) {
      if (st.status == SubtaskStatus::Done && rng() % 2) st.status = SubtaskStatus::Failed;
    }
    for (const auto& id : ready_set(worse)) {
      CHECK(std::find(ready.begin(), ready.end(), id) != ready.end());
    }
  }
}

TEST_CASE("status automaton admits only the listed transitions") {
  using S = SubtaskStatus;
  const std::vector<S> all{S::Pending, S::Ready, S::Running, S::Done, S::Failed, S::Skipped};
  const std::set<std::pair<S, S>> allowed{{S::Pending, S::Ready},
                                          {S::Ready, S::Running},
                                          {S::Running, S::Done},
                                          {S::Running, S::Failed},
                                          {S::Pending, S::Skipped}};
  for (S from : all) {
    for (S to : all) {
      CHECK(is_allowed_transition(from, to) == allowed.contains({from, to}));
      Subtask st;
      st.status = from;
      if (allowed.contains({from, to})) {
        st.transition(to);
        CHECK(st.status == to);
      } else {
        CHECK_THROWS_AS(st.transition(to), InvalidTransition);
        CHECK(st.status == from);
      }
    }
  }
}

TEST_CASE("task file codec") {
  const Value doc = parse_canonical(R"({"id":"t1","description":"d","success_note":"n",
    "subgoals":[{"id":"a","description":"compute x","args":{"expr":"1+1"}},
                {"id":"b","description":"save","tool_hint":"kvstore","depends_on":["a"],"fallback_tool":"echo"}]})");
  const Task task = task_from_value(doc);
  CHECK(task.id == "t1");
  REQUIRE(task.subgoals.size() == 2);
  CHECK(task.subgoals[1].tool_hint == "kvstore");
  CHECK(task.subgoals[1].fallback_tool == "echo");
  CHECK(task.subgoals[1].depends_on == std::vector<std::string>{"a"});
  CHECK(task_from_value(task_to_value(task)).subgoals[0].args == task.subgoals[0].args);
  validate_task(task);

  CHECK_THROWS_AS(task_from_value(parse_canonical(R"({"id":"t"})")), std::invalid_argument);
  CHECK_THROWS_AS(task_from_value(parse_canonical(R"({"id":1,"subgoals":[]})")), std::invalid_argument);
  CHECK_THROWS_AS(validate_task(task_from_value(parse_canonical(R"({"id":"t","subgoals":[]})"))),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_task(task_from_value(parse_canonical(
                      R"({"id":"t","subgoals":[{"id":"a","depends_on":["zz"]}]})"))),
                  std::invalid_argument);
}
