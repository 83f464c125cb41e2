#include "workstate/planner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace workstate {

std::string bind_tool_by_keyword(std::string_view description) {
  std::string lower(description);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto mentions = [&](std::string_view word) { return lower.find(word) != std::string::npos; };
  if (mentions("compute") || mentions("calculate")) return "calc";
  if (mentions("store") || mentions("save") || mentions("fetch")) return "kvstore";
  return "echo";
}

int estimate_steps(double estimate, int max_steps) {
  // std::nearbyint honours the default FE_TONEAREST mode: ties go to even.
  const double rounded = std::nearbyint(estimate);
  return static_cast<int>(std::clamp(rounded, 1.0, static_cast<double>(std::max(1, max_steps))));
}

Plan RulePlanner::propose_plan(const Task& task, const StrategyState& strategy) const {
  Plan plan;
  plan.task_id = task.id;
  plan.version = 1;
  for (const auto& sg : task.subgoals) {
    if (sg.tool_hint && !tools_.contains(*sg.tool_hint)) throw UnknownTool(*sg.tool_hint);
    if (sg.fallback_tool && !tools_.contains(*sg.fallback_tool)) throw UnknownTool(*sg.fallback_tool);
    Subtask st;
    st.id = sg.id;
    st.description = sg.description;
    st.tool = sg.tool_hint ? *sg.tool_hint : bind_tool_by_keyword(sg.description);
    if (!tools_.contains(st.tool)) throw UnknownTool(st.tool);
    st.args = sg.args;
    st.depends_on = sg.depends_on;
    st.estimated_steps = estimate_steps(strategy.step_estimate(st.tool), max_steps_);
    st.fallback_tool = sg.fallback_tool;
    plan.subtasks.push_back(std::move(st));
  }
  return plan;
}

RevisionOutcome RulePlanner::propose_revision(const Plan& plan, const FailureContext& failure,
                                              const StrategyState& strategy) const {
  const Subtask* failed = plan.find(failure.subtask_id);
  if (!failed) throw UnknownSubtask(failure.subtask_id);
  if (!failed->fallback_tool) return AbortTask{"no fallback for " + failure.subtask_id};

  RevisedPlan revised;
  revised.plan = plan;
  revised.plan.version = plan.version + 1;
  Subtask& target = *revised.plan.find(failure.subtask_id);
  target.tool = *failed->fallback_tool;
  target.fallback_tool.reset();
  target.status = SubtaskStatus::Pending;
  target.estimated_steps = estimate_steps(strategy.step_estimate(target.tool), max_steps_);
  revised.reason = "subtask " + failure.subtask_id + " failed (" +
                   (failure.error_class.empty() ? "unknown" : failure.error_class) +
                   "); rebound to " + target.tool;
  revised.changed_subtasks = {failure.subtask_id};
  return revised;
}

}  // namespace workstate
