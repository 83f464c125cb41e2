#pragma once
// `workstate run|verify|journal|replay|stress` entry point.
// Exit codes: 0 success, 1 usage or I/O error, 2 domain failure.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "workstate/executor.hpp"
#include "workstate/ledger.hpp"
#include "workstate/simenv.hpp"
#include "workstate/strategy.hpp"
#include "workstate/task_model.hpp"
#include "workstate/worker.hpp"

namespace workstate::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDomain = 2;

enum class ClockMode { Logical, Wall };

struct RunConfig {
  std::vector<std::filesystem::path> task_files;
  int workers = 1;
  // Overrides the seed of the environment config; 0 when neither is given.
  std::optional<std::uint64_t> seed;
  int max_steps = kDefaultMaxSteps;
  std::filesystem::path ledger_path = "run.wsl.jsonl";
  std::optional<std::filesystem::path> rules_path;
  std::optional<std::filesystem::path> strategy_path;
  std::optional<std::filesystem::path> env_path;
  ClockMode clock = ClockMode::Logical;
};

// Everything a workload needs once files are loaded.
struct Workload {
  std::vector<Task> tasks;
  EnvConfig env;
  std::vector<ReflexRule> rules;
  StrategyState strategy;
  int workers = 1;
  int max_steps = kDefaultMaxSteps;
  ClockMode clock = ClockMode::Logical;
};

struct WorkloadResult {
  std::unique_ptr<Ledger> ledger = std::make_unique<Ledger>();
  std::vector<TaskReport> reports;
  StrategyState final_strategy;
};

// Runs the workload on a fresh ledger. Throws std::invalid_argument when a
// task does not validate or names an unknown tool.
WorkloadResult execute_workload(const Workload& workload);

// Reads a canonical-dialect document. Throws std::runtime_error (I/O) or
// std::invalid_argument (syntax).
Value load_document(const std::filesystem::path& path);

// N synthetic tasks, each a chain of M calc subtasks with seed-derived
// expressions. Task ids sort in generation order.
std::vector<Task> make_stress_workload(int n_tasks, int subtasks_per_task, std::uint64_t seed);

// Kind + canonical payload of each entry of `task_id`, in seq order.
std::vector<std::string> projected_transcript(std::span<const LedgerEntry> entries,
                                              std::string_view task_id);

// One summary line per task: "<task_id> <phase> steps=<n> reflexes=<m> versions=<v>".
std::string summary_line(const TaskReport& report);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);
// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace workstate::cli
