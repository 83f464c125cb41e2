#pragma once
// Task and plan data model: dependency-DAG validation, readiness, and a
// deterministic topological order.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "workstate/canonical.hpp"

namespace workstate {

struct SubgoalSpec {
  std::string id;
  std::string description;
  std::optional<std::string> tool_hint;
  Value args = Value::object();
  std::vector<std::string> depends_on;
  std::optional<std::string> fallback_tool;
};

struct Task {
  std::string id;
  std::string description;
  std::vector<SubgoalSpec> subgoals;
  std::string success_note;
};

enum class SubtaskStatus { Pending, Ready, Running, Done, Failed, Skipped };
std::string_view to_string(SubtaskStatus status);

// Allowed: Pending->Ready->Running->{Done|Failed}, Pending->Skipped.
bool is_allowed_transition(SubtaskStatus from, SubtaskStatus to);

class InvalidTransition : public std::logic_error {
 public:
  InvalidTransition(SubtaskStatus from, SubtaskStatus to);
};

struct Subtask {
  std::string id;
  std::string description;
  std::string tool;
  Value args = Value::object();
  std::vector<std::string> depends_on;
  int estimated_steps = 1;
  SubtaskStatus status = SubtaskStatus::Pending;
  // Carried over from the subgoal; consumed by the first revision that uses it.
  std::optional<std::string> fallback_tool;

  // Throws InvalidTransition for moves outside the status automaton.
  void transition(SubtaskStatus to);

  bool operator==(const Subtask&) const = default;
};

struct Plan {
  std::string task_id;
  int version = 1;
  std::vector<Subtask> subtasks;

  const Subtask* find(std::string_view id) const;
  Subtask* find(std::string_view id);

  bool operator==(const Plan&) const = default;
};

namespace plan_error {
struct EmptyPlan {
  bool operator==(const EmptyPlan&) const = default;
};
struct DuplicateId {
  std::string id;
  bool operator==(const DuplicateId&) const = default;
};
struct UnknownDependency {
  std::string from;
  std::string to;
  bool operator==(const UnknownDependency&) const = default;
};
struct CyclicDependency {
  std::vector<std::string> cycle;
  bool operator==(const CyclicDependency&) const = default;
};
}  // namespace plan_error

using PlanError = std::variant<plan_error::EmptyPlan, plan_error::DuplicateId,
                               plan_error::UnknownDependency, plan_error::CyclicDependency>;

std::string describe(const PlanError& error);

// nullopt when the plan is non-empty, ids are unique, every dependency
// resolves and the graph is acyclic. A reported cycle starts at its
// lexicographically smallest member.
std::optional<PlanError> validate_plan(const Plan& plan);

// Pending subtasks whose dependencies are all Done, sorted by id.
std::vector<std::string> ready_set(const Plan& plan);

// Kahn's algorithm taking the lexicographically smallest available id at
// every step. Requires a valid plan.
std::vector<std::string> topological_order(const Plan& plan);

// Task file (`.task.json`) codec. Throws std::invalid_argument on bad input.
Task task_from_value(const Value& doc);
Value task_to_value(const Task& task);

// Structural task checks: non-empty id, at least one subgoal, unique subgoal
// ids, resolvable depends_on. Throws std::invalid_argument.
void validate_task(const Task& task);

Value plan_subtasks_payload(const Plan& plan);

}  // namespace workstate
