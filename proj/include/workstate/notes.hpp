#pragma once
// Work journal rendering: a fixed-template Markdown narrative of a verified
// ledger. Output is a pure function of the entries.

#include <span>
#include <string>
#include <string_view>

#include "workstate/ledger.hpp"

namespace workstate {

struct TaskSummary {
  std::string task_id;
  TaskPhase phase = TaskPhase::Received;
  int plan_versions = 0;
  int subtasks_done = 0;
  int subtasks_failed = 0;
  int steps_total = 0;
  int reflexes_total = 0;

  bool operator==(const TaskSummary&) const = default;
};

// Throws TaskNotFound.
TaskSummary summarize_task(std::span<const LedgerEntry> entries, std::string_view task_id);

// Throws ChainInvalid when the entries do not verify.
std::string render_journal(std::span<const LedgerEntry> entries);

}  // namespace workstate
