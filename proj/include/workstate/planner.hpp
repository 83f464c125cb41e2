#pragma once
// Plan synthesis and revision behind the Reasoner interface. RulePlanner is
// the deterministic reference implementation.

#include <set>
#include <stdexcept>
#include <string>
#include <variant>

#include "workstate/ledger.hpp"
#include "workstate/strategy.hpp"
#include "workstate/task_model.hpp"

namespace workstate {

struct FailureContext {
  std::string subtask_id;
  std::string error_class;
  int steps_used = 1;
  int reflexes_fired = 0;
};

struct RevisedPlan {
  Plan plan;
  std::string reason;
  std::vector<std::string> changed_subtasks;
};

struct AbortTask {
  std::string reason;
};

using RevisionOutcome = std::variant<RevisedPlan, AbortTask>;

class UnknownTool : public std::invalid_argument {
 public:
  explicit UnknownTool(const std::string& name) : std::invalid_argument("unknown tool: " + name) {}
};

class UnknownSubtask : public std::invalid_argument {
 public:
  explicit UnknownSubtask(const std::string& id) : std::invalid_argument("unknown subtask: " + id) {}
};

// Implementations must be deterministic for identical inputs.
class Reasoner {
 public:
  virtual ~Reasoner() = default;
  virtual Plan propose_plan(const Task& task, const StrategyState& strategy) const = 0;
  virtual RevisionOutcome propose_revision(const Plan& plan, const FailureContext& failure,
                                           const StrategyState& strategy) const = 0;
};

// Tool for a subgoal without a hint: "compute"/"calculate" -> calc,
// "store"/"save"/"fetch" -> kvstore, anything else -> echo. Case-insensitive.
std::string bind_tool_by_keyword(std::string_view description);

// Round half to even, then clamp to [1, max_steps].
int estimate_steps(double estimate, int max_steps);

class RulePlanner final : public Reasoner {
 public:
  RulePlanner(std::set<std::string> registered_tools, int max_steps = kDefaultMaxSteps)
      : tools_(std::move(registered_tools)), max_steps_(max_steps) {}

  // One subtask per subgoal, order and dependencies preserved, version 1.
  // Throws UnknownTool when a tool hint or fallback names an unregistered tool.
  Plan propose_plan(const Task& task, const StrategyState& strategy) const override;

  // Fallback substitution: rebinds the failed subtask to its fallback tool
  // and resets it to Pending under version+1; otherwise aborts.
  // Throws UnknownSubtask.
  RevisionOutcome propose_revision(const Plan& plan, const FailureContext& failure,
                                   const StrategyState& strategy) const override;

 private:
  std::set<std::string> tools_;
  int max_steps_;
};

}  // namespace workstate
