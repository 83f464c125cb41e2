#pragma once
// Task lifecycle orchestration and the multi-worker pool.
//
// Per task: TaskReceived, PlanCreated, then rounds over the ready set in
// topological order. Each subtask attempt is followed by FeedbackFused; a
// failed attempt asks the planner for a revision (PlanRevised, at most
// max_revisions) or ends the task with TaskAborted. TaskCompleted is written
// once every subtask is Done.
//
// Planning and the values recorded in FeedbackFused come from a task-local
// strategy seeded with the run's starting snapshot, so a task's transcript
// does not depend on how tasks interleave. Every feedback record is also
// folded into the shared strategy, which is what gets persisted.

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "workstate/executor.hpp"
#include "workstate/ledger.hpp"
#include "workstate/planner.hpp"
#include "workstate/simenv.hpp"
#include "workstate/strategy.hpp"
#include "workstate/task_model.hpp"

namespace workstate {

inline constexpr int kDefaultMaxRevisions = 3;

class ValidationFailed : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TaskReport {
  std::string task_id;
  TaskPhase final_phase = TaskPhase::Received;
  int plan_versions = 0;
  std::vector<SubtaskOutcome> outcomes;
  std::size_t entries_appended = 0;
  int steps_taken = 0;
  int reflexes_fired = 0;
  // Set when the task could not run (validation or configuration errors).
  std::string error;
};

using EnvironmentFactory = std::function<std::unique_ptr<Environment>()>;

struct RunDeps {
  Ledger& ledger;
  Clock& clock;
  const Reasoner& planner;
  std::span<const ReflexRule> rules;
  SharedStrategy& strategy;
  // Starting point of every task-local strategy.
  StrategyState base_strategy;
  EnvironmentFactory make_environment;
  int max_steps = kDefaultMaxSteps;
  int max_revisions = kDefaultMaxRevisions;
};

// Runs one task against `env`, which is reset first. Throws ValidationFailed
// after TaskReceived when the task or its plan is invalid.
TaskReport run_task(const Task& task, Environment& env, const std::string& worker_id,
                    const RunDeps& deps);

// Workers pull tasks from a shared queue in submission order; reports come
// back in task order. Errors are captured per task.
std::vector<TaskReport> run_concurrent(std::span<const Task> tasks, int n_workers,
                                       const RunDeps& deps);

}  // namespace workstate
