#include "workstate/worker.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <thread>

namespace workstate {
namespace {

class TaskRun {
 public:
  TaskRun(const Task& task, Environment& env, std::string worker_id, const RunDeps& deps)
      : task_(task), env_(env), worker_id_(std::move(worker_id)), deps_(deps),
        strategy_(deps.base_strategy) {
    report_.task_id = task.id;
  }

  TaskReport run() {
    env_.reset();
    append(EntryKind::TaskReceived, {{"description", task_.description}});

    Plan plan;
    try {
      validate_task(task_);
      plan = deps_.planner.propose_plan(task_, strategy_);
      if (auto err = validate_plan(plan)) throw ValidationFailed(describe(*err));
    } catch (const ValidationFailed&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ValidationFailed(e.what());
    }
    report_.final_phase = TaskPhase::Planned;
    report_.plan_versions = plan.version;
    append(EntryKind::PlanCreated,
           {{"plan_version", plan.version}, {"subtasks", plan_subtasks_payload(plan)}});

    int revisions = 0;
    while (true) {
      const auto ready = ordered_ready(plan);
      if (ready.empty()) {
        const bool all_done = std::all_of(plan.subtasks.begin(), plan.subtasks.end(),
                                          [](const Subtask& s) { return s.status == SubtaskStatus::Done; });
        if (all_done) {
          append(EntryKind::TaskCompleted, Value::object());
          report_.final_phase = TaskPhase::Completed;
        } else {
          abort("no runnable subtasks");
        }
        break;
      }

      for (const auto& id : ready) {
        Subtask& st = *plan.find(id);
        st.transition(SubtaskStatus::Ready);
        st.transition(SubtaskStatus::Running);
        report_.final_phase = TaskPhase::Executing;

        SubtaskOutcome outcome = execute_subtask(
            st, env_, deps_.rules, deps_.max_steps,
            StepRecorder([this](EntryKind kind, Value payload) { append(kind, std::move(payload)); }));
        st.transition(outcome.status);
        report_.steps_taken += outcome.steps_used;
        report_.reflexes_fired += outcome.reflexes_fired;
        fuse(st, outcome);
        const bool failed = outcome.status == SubtaskStatus::Failed;
        FailureContext failure{st.id, outcome.last_error_class, outcome.steps_used,
                               outcome.reflexes_fired};
        report_.outcomes.push_back(std::move(outcome));
        if (!failed) continue;

        if (revisions >= deps_.max_revisions) {
          abort("revision limit reached");
          return finish();
        }
        RevisionOutcome revision = deps_.planner.propose_revision(plan, failure, strategy_);
        if (auto* stop = std::get_if<AbortTask>(&revision)) {
          abort(stop->reason);
          return finish();
        }
        auto& revised = std::get<RevisedPlan>(revision);
        if (auto err = validate_plan(revised.plan)) {
          abort("revised plan invalid: " + describe(*err));
          return finish();
        }
        plan = std::move(revised.plan);
        ++revisions;
        report_.plan_versions = plan.version;
        append(EntryKind::PlanRevised, {{"plan_version", plan.version},
                                        {"reason", revised.reason},
                                        {"changed_subtasks", revised.changed_subtasks}});
        break;
      }
    }
    return finish();
  }

 private:
  std::vector<std::string> ordered_ready(const Plan& plan) const {
    const auto ready = ready_set(plan);
    const auto order = topological_order(plan);
    std::vector<std::string> out;
    for (const auto& id : order) {
      if (std::binary_search(ready.begin(), ready.end(), id)) out.push_back(id);
    }
    return out;
  }

  void fuse(const Subtask& st, const SubtaskOutcome& outcome) {
    FeedbackRecord fb{st.id, st.tool, outcome.status == SubtaskStatus::Done, st.estimated_steps,
                      std::max(1, outcome.steps_used)};
    FusedUpdate local;
    strategy_ = fuse_feedback(strategy_, fb, deps_.max_steps, &local);
    deps_.strategy.apply(fb, deps_.max_steps);
    append(EntryKind::FeedbackFused, {{"subtask_id", st.id},
                                      {"tool", st.tool},
                                      {"old_rate", local.old_rate},
                                      {"new_rate", local.new_rate},
                                      {"old_estimate", local.old_estimate},
                                      {"new_estimate", local.new_estimate}});
  }

  void abort(const std::string& reason) {
    append(EntryKind::TaskAborted, {{"reason", reason}});
    report_.final_phase = TaskPhase::Aborted;
  }

  void append(EntryKind kind, Value payload) {
    deps_.ledger.append(EntryDraft{kind, std::move(payload), worker_id_, task_.id}, deps_.clock);
    ++report_.entries_appended;
  }

  TaskReport finish() { return std::move(report_); }

  const Task& task_;
  Environment& env_;
  std::string worker_id_;
  const RunDeps& deps_;
  StrategyState strategy_;
  TaskReport report_;
};

}  // namespace

TaskReport run_task(const Task& task, Environment& env, const std::string& worker_id,
                    const RunDeps& deps) {
  return TaskRun(task, env, worker_id, deps).run();
}

std::vector<TaskReport> run_concurrent(std::span<const Task> tasks, int n_workers,
                                       const RunDeps& deps) {
  if (n_workers < 1) throw std::invalid_argument("n_workers must be >= 1");
  std::set<std::string> ids;
  for (const auto& t : tasks) {
    if (!ids.insert(t.id).second) throw std::invalid_argument("duplicate task id: " + t.id);
  }

  std::vector<TaskReport> reports(tasks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&](int worker_index) {
    const std::string worker_id = "w" + std::to_string(worker_index);
    std::unique_ptr<Environment> env;
    std::string env_error;
    try {
      env = deps.make_environment();
    } catch (const std::exception& e) {
      env_error = e.what();
    }
    for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      TaskReport& report = reports[i];
      report.task_id = tasks[i].id;
      if (!env) {
        report.error = "environment unavailable: " + env_error;
        continue;
      }
      try {
        report = run_task(tasks[i], *env, worker_id, deps);
      } catch (const std::exception& e) {
        report.error = e.what();
      }
    }
  };

  const int n = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n_workers),
                                                       std::max<std::size_t>(1, tasks.size())));
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int w = 0; w < n; ++w) pool.emplace_back(work, w);
  }
  return reports;
}

}  // namespace workstate
