#include "workstate/notes.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace workstate {

TaskSummary summarize_task(std::span<const LedgerEntry> entries, std::string_view task_id) {
  const WorkStateView view = reconstruct_state(entries, task_id);
  TaskSummary s;
  s.task_id = std::string(task_id);
  s.phase = view.phase;
  for (const auto& e : entries) {
    if (e.task_id != task_id) continue;
    switch (e.kind) {
      case EntryKind::PlanCreated:
      case EntryKind::PlanRevised:
        s.plan_versions = std::max(s.plan_versions, e.payload.value("plan_version", 0));
        break;
      case EntryKind::SubtaskCompleted: ++s.subtasks_done; break;
      case EntryKind::SubtaskFailed: ++s.subtasks_failed; break;
      case EntryKind::ActionDispatched: ++s.steps_total; break;
      case EntryKind::ReflexTriggered: ++s.reflexes_total; break;
      default: break;
    }
  }
  return s;
}

namespace {

std::string quoted(const Value& v) {
  return canonical_dump(v.is_string() ? v : Value(canonical_dump(v)));
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string str(const Value& payload, const char* key) {
  auto it = payload.find(key);
  if (it == payload.end()) return {};
  return it->is_string() ? it->get<std::string>() : canonical_dump(*it);
}

std::string join(const Value& list, std::string_view empty) {
  if (!list.is_array() || list.empty()) return std::string(empty);
  std::string out;
  for (const auto& v : list) {
    if (!out.empty()) out += ", ";
    out += v.is_string() ? v.get<std::string>() : canonical_dump(v);
  }
  return out;
}

std::string step_ref(const Value& p) { return str(p, "subtask_id") + " step " + str(p, "step"); }

class TaskSection {
 public:
  explicit TaskSection(std::string task_id) : task_id_(std::move(task_id)) {}

  void add(const LedgerEntry& e) {
    const Value& p = e.payload;
    switch (e.kind) {
      case EntryKind::TaskReceived:
        description_ = str(p, "description");
        break;
      case EntryKind::PlanCreated:
        plan_ << "- Version " << str(p, "plan_version") << "\n";
        for (const auto& st : p.value("subtasks", Value::array())) {
          plan_ << "  - " << str(st, "id") << " (" << str(st, "tool") << "): " << str(st, "description")
                << "; depends on: " << join(st.value("depends_on", Value::array()), "none")
                << "; estimated steps: " << str(st, "estimated_steps") << "\n";
        }
        break;
      case EntryKind::PlanRevised:
        plan_ << "- Version " << str(p, "plan_version") << ": " << str(p, "reason")
              << " (changed: " << join(p.value("changed_subtasks", Value::array()), "none") << ")\n";
        flush_step();
        execution_ << "- Plan revised to version " << str(p, "plan_version") << ": " << str(p, "reason")
                   << "\n";
        break;
      case EntryKind::ThoughtRecorded:
        flush_step();
        pending_ = Pending{step_ref(p), "Thought: " + quoted(p["text"])};
        break;
      case EntryKind::ActionDispatched: {
        std::string part = "Action: " + str(p, "tool") + " " + canonical_dump(p.value("args", Value::object()));
        if (!pending_ || pending_->ref != step_ref(p)) {
          flush_step();
          pending_ = Pending{step_ref(p), part};
        } else {
          pending_->text += " → " + part;
        }
        break;
      }
      case EntryKind::ObservationRecorded: {
        const bool ok = p.value("ok", false);
        std::string part = "Observation: " + std::string(ok ? "ok " : "failed ") +
                           (ok ? quoted(p["output"]) : "[" + str(p, "error_class") + "] " + quoted(p["output"]));
        if (!pending_ || pending_->ref != step_ref(p)) {
          flush_step();
          pending_ = Pending{step_ref(p), part};
        } else {
          pending_->text += " → " + part;
        }
        flush_step();
        break;
      }
      case EntryKind::ReflexTriggered:
        flush_step();
        execution_ << "  - Reflex " << str(p, "rule_id") << " fired at " << step_ref(p) << ": "
                   << str(p, "reflex") << "\n";
        break;
      case EntryKind::SubtaskCompleted:
        flush_step();
        execution_ << "- " << str(p, "subtask_id") << " completed after " << str(p, "steps_used")
                   << " step(s)\n";
        break;
      case EntryKind::SubtaskFailed:
        flush_step();
        execution_ << "- " << str(p, "subtask_id") << " failed after " << str(p, "steps_used")
                   << " step(s): " << str(p, "reason") << "\n";
        break;
      case EntryKind::FeedbackFused:
        feedback_ << "- " << str(p, "subtask_id") << " (" << str(p, "tool") << "): success rate "
                  << fixed4(p.value("old_rate", 0.0)) << " → " << fixed4(p.value("new_rate", 0.0))
                  << "; step estimate " << fixed4(p.value("old_estimate", 0.0)) << " → "
                  << fixed4(p.value("new_estimate", 0.0)) << "\n";
        break;
      case EntryKind::TaskCompleted:
        outcome_ = "Completed.";
        break;
      case EntryKind::TaskAborted:
        outcome_ = "Aborted: " + str(p, "reason") + ".";
        break;
    }
  }

  void render(std::ostream& out, const TaskSummary& summary) {
    flush_step();
    out << "## Task " << task_id_ << ": " << to_string(summary.phase) << "\n\n";
    if (!description_.empty()) out << "Description: " << description_ << "\n\n";
    out << "### Plan\n\n" << or_none(plan_.str()) << "\n";
    out << "### Execution\n\n" << or_none(execution_.str()) << "\n";
    out << "### Feedback\n\n" << or_none(feedback_.str()) << "\n";
    out << "### Outcome\n\n"
        << (outcome_.empty() ? "In progress." : outcome_) << " Subtasks done: " << summary.subtasks_done
        << ", failed: " << summary.subtasks_failed << "; steps: " << summary.steps_total
        << "; reflexes: " << summary.reflexes_total << "; plan versions: " << summary.plan_versions
        << ".\n\n";
  }

 private:
  struct Pending {
    std::string ref;
    std::string text;
  };

  static std::string or_none(const std::string& body) { return body.empty() ? "- none\n" : body; }

  void flush_step() {
    if (!pending_) return;
    execution_ << "- " << pending_->ref << ": " << pending_->text << "\n";
    pending_.reset();
  }

  std::string task_id_;
  std::string description_;
  std::ostringstream plan_;
  std::ostringstream execution_;
  std::ostringstream feedback_;
  std::string outcome_;
  std::optional<Pending> pending_;
};

}  // namespace

std::string render_journal(std::span<const LedgerEntry> entries) {
  auto report = verify_chain(entries);
  if (!report.valid) throw ChainInvalid(std::move(report));

  std::ostringstream out;
  out << "# Work Journal\n\n";
  if (entries.empty()) {
    out << "No tasks recorded.\n";
    return out.str();
  }
  out << "Ledger: " << entries.size() << " entries, head " << entries.back().entry_hash << "\n\n";

  std::vector<std::string> order;
  std::map<std::string, TaskSection> sections;
  for (const auto& e : entries) {
    auto it = sections.find(e.task_id);
    if (it == sections.end()) {
      order.push_back(e.task_id);
      it = sections.emplace(e.task_id, TaskSection(e.task_id)).first;
    }
    it->second.add(e);
  }
  for (const auto& id : order) sections.at(id).render(out, summarize_task(entries, id));
  return out.str();
}

}  // namespace workstate
