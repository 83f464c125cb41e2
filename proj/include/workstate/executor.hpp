#pragma once
// Bounded thought -> action -> observation loop for a single subtask, with
// reflex rules consulted between a failed observation and the next thought.

#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "workstate/ledger.hpp"
#include "workstate/simenv.hpp"
#include "workstate/task_model.hpp"

namespace workstate {

namespace reflex {
struct Retry {
  int max_retries = 1;
  bool operator==(const Retry&) const = default;
};
struct SubstituteTool {
  std::string tool;
  bool operator==(const SubstituteTool&) const = default;
};
// Shallow merge; patch keys overwrite.
struct AdjustArgs {
  Value patch = Value::object();
  bool operator==(const AdjustArgs&) const = default;
};
struct AbortSubtask {
  bool operator==(const AbortSubtask&) const = default;
};
}  // namespace reflex

using Reflex = std::variant<reflex::Retry, reflex::SubstituteTool, reflex::AdjustArgs, reflex::AbortSubtask>;

// Short label recorded in ReflexTriggered entries, e.g. "retry" or
// "substitute_tool:echo".
std::string describe(const Reflex& r);

struct ReflexRule {
  std::string id;
  int priority = 0;
  // Exact error_class, or "*" for any.
  std::string trigger;
  Reflex reflex;

  bool operator==(const ReflexRule&) const = default;
};

// `.reflex.json` codec: a list of
//   {id, priority, trigger, reflex: "Retry"|"SubstituteTool"|"AdjustArgs"|"AbortSubtask",
//    max_retries?, tool?, patch?}
// Throws std::invalid_argument (duplicate ids, max_retries < 1, ...).
std::vector<ReflexRule> reflex_rules_from_value(const Value& doc);
Value reflex_rules_to_value(std::span<const ReflexRule> rules);

// Lowest-priority matching rule (ties by id) whose retry budget is not yet
// used up; nullptr when nothing matches.
const ReflexRule* apply_reflex(const std::string& error_class, std::span<const ReflexRule> rules,
                               const std::map<std::string, int>& retries_so_far);

struct ReActStep {
  int step = 1;
  std::string thought;
  std::string tool;
  Value args = Value::object();
  ToolResult observation;
};

struct SubtaskOutcome {
  std::string subtask_id;
  SubtaskStatus status = SubtaskStatus::Failed;
  int steps_used = 0;
  int reflexes_fired = 0;
  std::string reason;
  // error_class of the last failed observation; empty on success.
  std::string last_error_class;
  std::vector<ReActStep> transcript;
};

class UnregisteredTool : public std::invalid_argument {
 public:
  explicit UnregisteredTool(const std::string& name)
      : std::invalid_argument("unregistered tool: " + name) {}
};

// Receives the executor's ledger events. Only the six executor kinds pass;
// anything else is a logic error.
class StepRecorder {
 public:
  using Sink = std::function<void(EntryKind, Value)>;
  explicit StepRecorder(Sink sink) : sink_(std::move(sink)) {}

  void record(EntryKind kind, Value payload) const;
  static bool permits(EntryKind kind);

 private:
  Sink sink_;
};

inline constexpr const char* kBudgetExhausted = "step budget exhausted";
inline constexpr const char* kLedgerUnavailable = "ledger unavailable";

// Throws UnregisteredTool (subtask tool or a substitute tool in `rules`) or
// std::invalid_argument for max_steps < 1, before any step runs.
SubtaskOutcome execute_subtask(const Subtask& subtask, Environment& tools,
                               std::span<const ReflexRule> rules, int max_steps,
                               const StepRecorder& recorder);

}  // namespace workstate
