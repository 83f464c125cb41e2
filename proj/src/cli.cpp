#include "workstate/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "workstate/notes.hpp"
#include "workstate/planner.hpp"

namespace workstate::cli {
namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::runtime_error("cannot read " + path.string());
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  out.flush();
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string ledger_text(const Ledger& ledger) {
  std::ostringstream buf;
  ledger.export_to(buf);
  return buf.str();
}

std::vector<LedgerEntry> read_ledger_entries(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return Ledger::read_entries(in);
}

// Usage and I/O failures; reported with exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Workload load_workload(const RunConfig& config) {
  if (config.workers < 1) throw UsageError("--workers must be >= 1");
  if (config.max_steps < 1) throw UsageError("--max-steps must be >= 1");
  if (config.task_files.empty()) throw UsageError("no task files given");
  Workload w;
  w.workers = config.workers;
  w.max_steps = config.max_steps;
  w.clock = config.clock;
  try {
    for (const auto& path : config.task_files) {
      Task task = task_from_value(load_document(path));
      validate_task(task);
      w.tasks.push_back(std::move(task));
    }
    if (config.env_path) w.env = env_config_from_value(load_document(*config.env_path));
    if (config.seed) w.env.seed = *config.seed;
    if (config.rules_path) w.rules = reflex_rules_from_value(load_document(*config.rules_path));
    if (config.strategy_path && std::filesystem::exists(*config.strategy_path)) {
      w.strategy = strategy_from_value(load_document(*config.strategy_path));
    }
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  std::set<std::string> ids;
  for (const auto& t : w.tasks) {
    if (!ids.insert(t.id).second) throw UsageError("duplicate task id " + t.id);
  }
  return w;
}

void add_run_options(CLI::App& cmd, RunConfig& config, std::string& clock) {
  cmd.add_option("tasks", config.task_files, "Task files (.task.json)");
  cmd.add_option("--workers", config.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd.add_option("--seed", config.seed, "Environment seed");
  cmd.add_option("--max-steps", config.max_steps, "Step budget per subtask attempt")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--ledger", config.ledger_path, "Ledger file (.wsl.jsonl)");
  cmd.add_option("--rules", config.rules_path, "Reflex rules (.reflex.json)");
  cmd.add_option("--strategy", config.strategy_path, "Strategy file, loaded and persisted");
  cmd.add_option("--env", config.env_path, "Environment config (.env.json)");
  cmd.add_option("--clock", clock, "logical|wall")->check(CLI::IsMember({"logical", "wall"}));
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Workload workload;
  WorkloadResult result;
  try {
    workload = load_workload(config);
    result = execute_workload(workload);
  } catch (const std::exception& e) {
    err << "workstate run: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    write_file(config.ledger_path, ledger_text(*result.ledger));
    if (config.strategy_path) {
      write_file(*config.strategy_path, canonical_dump(strategy_to_value(result.final_strategy)) + "\n");
    }
  } catch (const std::exception& e) {
    err << "workstate run: " << e.what() << "\n";
    return kExitUsage;
  }
  bool all_completed = true;
  for (const auto& report : result.reports) {
    out << summary_line(report) << "\n";
    if (!report.error.empty()) err << report.task_id << ": " << report.error << "\n";
    if (report.final_phase != TaskPhase::Completed) all_completed = false;
  }
  return all_completed ? kExitOk : kExitDomain;
}

int cmd_verify(const std::filesystem::path& path, std::ostream& out, std::ostream& err) {
  std::vector<LedgerEntry> entries;
  try {
    entries = read_ledger_entries(path);
  } catch (const std::exception& e) {
    err << "workstate verify: " << e.what() << "\n";
    return kExitUsage;
  }
  const auto report = verify_chain(entries);
  if (!report.valid) {
    out << "INVALID at " << *report.first_bad_index << ": " << to_string(report.reason) << "\n";
    return kExitDomain;
  }
  out << "VALID " << entries.size() << " entries head="
      << (entries.empty() ? kGenesisHash : entries.back().entry_hash) << "\n";
  return kExitOk;
}

int cmd_journal(const std::filesystem::path& path, const std::optional<std::filesystem::path>& output,
                std::ostream& out, std::ostream& err) {
  std::vector<LedgerEntry> entries;
  try {
    entries = read_ledger_entries(path);
  } catch (const std::exception& e) {
    err << "workstate journal: " << e.what() << "\n";
    return kExitUsage;
  }
  std::string doc;
  try {
    doc = render_journal(entries);
  } catch (const ChainInvalid& e) {
    err << "workstate journal: " << e.what() << "\n";
    return kExitDomain;
  }
  if (!output) {
    out << doc;
    return kExitOk;
  }
  try {
    write_file(*output, doc);
  } catch (const std::exception& e) {
    err << "workstate journal: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_replay(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<LedgerEntry> recorded;
  Workload workload;
  try {
    recorded = read_ledger_entries(config.ledger_path);
    workload = load_workload(config);
  } catch (const std::exception& e) {
    err << "workstate replay: " << e.what() << "\n";
    return kExitUsage;
  }
  if (const auto report = verify_chain(recorded); !report.valid) {
    out << "INVALID at " << *report.first_bad_index << ": " << to_string(report.reason) << "\n";
    return kExitDomain;
  }
  if (!uses_logical_clock(recorded)) {
    err << "workstate replay: ledger was not produced with the logical clock\n";
    return kExitUsage;
  }
  std::vector<std::string> recorded_order;
  std::set<std::string> recorded_ids;
  for (const auto& e : recorded) {
    if (recorded_ids.insert(e.task_id).second) recorded_order.push_back(e.task_id);
  }
  std::set<std::string> given_ids;
  for (const auto& t : workload.tasks) given_ids.insert(t.id);
  if (given_ids != recorded_ids) {
    err << "workstate replay: task files do not match the tasks recorded in the ledger\n";
    return kExitUsage;
  }

  WorkloadResult rerun;
  try {
    rerun = execute_workload(workload);
  } catch (const std::exception& e) {
    err << "workstate replay: " << e.what() << "\n";
    return kExitUsage;
  }
  const auto replayed = rerun.ledger->snapshot();

  std::optional<std::uint64_t> first_index;
  std::string first_detail;
  for (const auto& id : recorded_order) {
    std::vector<const LedgerEntry*> original;
    for (const auto& e : recorded) {
      if (e.task_id == id) original.push_back(&e);
    }
    const auto expected = projected_transcript(recorded, id);
    const auto actual = projected_transcript(replayed, id);
    const std::size_t common = std::min(expected.size(), actual.size());
    std::optional<std::size_t> pos;
    for (std::size_t i = 0; i < common && !pos; ++i) {
      if (expected[i] != actual[i]) pos = i;
    }
    if (!pos && expected.size() != actual.size()) pos = common;
    if (!pos) continue;
    const std::uint64_t index =
        *pos < original.size() ? original[*pos]->seq : original.back()->seq + 1;
    if (!first_index || index < *first_index) {
      first_index = index;
      const std::string want =
          *pos < expected.size() ? expected[*pos].substr(0, expected[*pos].find(' ')) : "end";
      const std::string got = *pos < actual.size() ? actual[*pos].substr(0, actual[*pos].find(' ')) : "end";
      first_detail = "task=" + id + " expected=" + want + " got=" + got;
      if (want == got) first_detail += " (payload differs)";
    }
  }
  if (first_index) {
    out << "REPLAY DIVERGED at " << *first_index << ": " << first_detail << "\n";
    return kExitDomain;
  }
  out << "REPLAY MATCH\n";
  return kExitOk;
}

struct StressOptions {
  int tasks = 0;
  int subtasks = 0;
  int workers = 1;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> ledger_path;
  bool check_solo = false;
};

int cmd_stress(const StressOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.tasks < 1 || opts.subtasks < 1 || opts.workers < 1) {
    err << "workstate stress: --tasks, --subtasks and --workers must be >= 1\n";
    return kExitUsage;
  }
  Workload workload;
  workload.tasks = make_stress_workload(opts.tasks, opts.subtasks, opts.seed);
  workload.env.seed = opts.seed;
  workload.workers = opts.workers;

  const auto start = std::chrono::steady_clock::now();
  WorkloadResult result;
  try {
    result = execute_workload(workload);
  } catch (const std::exception& e) {
    err << "workstate stress: " << e.what() << "\n";
    return kExitUsage;
  }
  const auto wall = std::chrono::steady_clock::now() - start;
  const double wall_ms = std::chrono::duration<double, std::milli>(wall).count();

  const auto entries = result.ledger->snapshot();
  const bool chain_valid = verify_chain(entries).valid;
  bool all_completed = true;
  for (const auto& r : result.reports) {
    if (r.final_phase != TaskPhase::Completed) all_completed = false;
  }
  const long long subtasks = static_cast<long long>(opts.tasks) * opts.subtasks;
  const double throughput = wall_ms > 0 ? subtasks / (wall_ms / 1000.0) : 0.0;
  char throughput_text[64];
  std::snprintf(throughput_text, sizeof(throughput_text), "%.1f", throughput);
  out << "STRESS tasks=" << opts.tasks << " subtasks=" << subtasks << " workers=" << opts.workers
      << " entries=" << entries.size() << " wall_ms=" << static_cast<long long>(wall_ms)
      << " throughput=" << throughput_text << "\n";

  bool solo_match = true;
  if (opts.check_solo) {
    Workload solo = workload;
    solo.workers = 1;
    const auto solo_result = execute_workload(solo);
    const auto solo_entries = solo_result.ledger->snapshot();
    for (const auto& task : workload.tasks) {
      if (projected_transcript(entries, task.id) != projected_transcript(solo_entries, task.id)) {
        solo_match = false;
        break;
      }
    }
    out << "SOLO " << (solo_match ? "MATCH" : "MISMATCH") << "\n";
  }
  if (opts.ledger_path) {
    try {
      write_file(*opts.ledger_path, ledger_text(*result.ledger));
    } catch (const std::exception& e) {
      err << "workstate stress: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  if (!chain_valid) err << "workstate stress: ledger failed verification\n";
  return (all_completed && chain_valid && solo_match) ? kExitOk : kExitDomain;
}

}  // namespace

Value load_document(const std::filesystem::path& path) {
  return parse_canonical(read_file(path));
}

WorkloadResult execute_workload(const Workload& workload) {
  WorkloadResult result;
  {
    const Environment probe(workload.env);
    const auto names = probe.tool_names();
    RulePlanner planner(std::set<std::string>(names.begin(), names.end()), workload.max_steps);
    for (const auto& task : workload.tasks) {
      validate_task(task);
      planner.propose_plan(task, workload.strategy);
    }
    for (const auto& rule : workload.rules) {
      if (const auto* sub = std::get_if<reflex::SubstituteTool>(&rule.reflex); sub && !probe.has_tool(sub->tool)) {
        throw UnknownTool(sub->tool);
      }
    }

    LogicalClock logical;
    WallClock wall;
    Clock& clock = workload.clock == ClockMode::Logical ? static_cast<Clock&>(logical) : wall;
    SharedStrategy shared(workload.strategy);
    RunDeps deps{*result.ledger,
                 clock,
                 planner,
                 workload.rules,
                 shared,
                 workload.strategy,
                 [&] { return std::make_unique<Environment>(workload.env); },
                 workload.max_steps,
                 kDefaultMaxRevisions};
    result.reports = run_concurrent(workload.tasks, workload.workers, deps);
    result.final_strategy = shared.snapshot();
  }
  return result;
}

std::vector<Task> make_stress_workload(int n_tasks, int subtasks_per_task, std::uint64_t seed) {
  std::vector<Task> tasks;
  const int width = static_cast<int>(std::to_string(std::max(1, n_tasks)).size());
  for (int t = 0; t < n_tasks; ++t) {
    std::string num = std::to_string(t);
    Task task;
    task.id = "stress-" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;
    task.description = "synthetic chained calculation " + num;
    task.success_note = "all stages computed";
    for (int s = 0; s < subtasks_per_task; ++s) {
      const std::uint64_t r = mix(seed ^ mix(static_cast<std::uint64_t>(t) * 1000003u + static_cast<std::uint64_t>(s)));
      SubgoalSpec sg;
      sg.id = "c" + std::to_string(s + 1);
      sg.description = "compute stage " + std::to_string(s + 1);
      sg.tool_hint = "calc";
      sg.args = {{"expr", "(" + std::to_string(r % 97) + "+" + std::to_string((r >> 8) % 89) + ")*" +
                              std::to_string(1 + (r >> 16) % 13) + "/" + std::to_string(1 + (r >> 24) % 7)}};
      if (s > 0) sg.depends_on = {"c" + std::to_string(s)};
      task.subgoals.push_back(std::move(sg));
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::vector<std::string> projected_transcript(std::span<const LedgerEntry> entries,
                                              std::string_view task_id) {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (e.task_id == task_id) out.push_back(std::string(to_string(e.kind)) + " " + canonical_dump(e.payload));
  }
  return out;
}

std::string summary_line(const TaskReport& report) {
  return report.task_id + " " + std::string(to_string(report.final_phase)) +
         " steps=" + std::to_string(report.steps_taken) +
         " reflexes=" + std::to_string(report.reflexes_fired) +
         " versions=" + std::to_string(report.plan_versions);
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Work-state agent runtime"};
  app.name("workstate");
  app.require_subcommand(1);

  RunConfig run_config;
  std::string run_clock = "logical";
  auto* run_cmd = app.add_subcommand("run", "Run tasks and write the ledger");
  add_run_options(*run_cmd, run_config, run_clock);

  std::optional<std::filesystem::path> verify_positional;
  std::optional<std::filesystem::path> verify_ledger;
  auto* verify_cmd = app.add_subcommand("verify", "Verify a ledger's hash chain");
  verify_cmd->add_option("ledger_file", verify_positional, "Ledger file");
  verify_cmd->add_option("--ledger", verify_ledger, "Ledger file");

  std::optional<std::filesystem::path> journal_positional;
  std::optional<std::filesystem::path> journal_ledger;
  std::optional<std::filesystem::path> journal_output;
  auto* journal_cmd = app.add_subcommand("journal", "Render a ledger as a Markdown work journal");
  journal_cmd->add_option("ledger_file", journal_positional, "Ledger file");
  journal_cmd->add_option("--ledger", journal_ledger, "Ledger file");
  journal_cmd->add_option("-o,--output", journal_output, "Journal file (.journal.md); stdout if omitted");

  RunConfig replay_config;
  std::string replay_clock = "logical";
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a recorded workload and compare transcripts");
  add_run_options(*replay_cmd, replay_config, replay_clock);

  StressOptions stress;
  auto* stress_cmd = app.add_subcommand("stress", "Synthetic chained-calc scalability run");
  stress_cmd->add_option("--tasks", stress.tasks, "Number of tasks (N)")->required();
  stress_cmd->add_option("--subtasks", stress.subtasks, "Subtasks per task (M)")->required();
  stress_cmd->add_option("--workers", stress.workers, "Worker threads (W)");
  stress_cmd->add_option("--seed", stress.seed, "Workload seed");
  stress_cmd->add_option("--ledger", stress.ledger_path, "Write the resulting ledger here");
  stress_cmd->add_flag("--check-solo", stress.check_solo,
                       "Also run with one worker and compare per-task transcripts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto clock_mode = [](const std::string& s) { return s == "wall" ? ClockMode::Wall : ClockMode::Logical; };
  if (*run_cmd) {
    run_config.clock = clock_mode(run_clock);
    return cmd_run(run_config, out, err);
  }
  if (*verify_cmd || *journal_cmd) {
    const bool verify = static_cast<bool>(*verify_cmd);
    const auto& positional = verify ? verify_positional : journal_positional;
    const auto& flag = verify ? verify_ledger : journal_ledger;
    if (!positional && !flag) {
      err << "workstate: a ledger path is required\n";
      return kExitUsage;
    }
    const auto path = positional ? *positional : *flag;
    return verify ? cmd_verify(path, out, err) : cmd_journal(path, journal_output, out, err);
  }
  if (*replay_cmd) {
    replay_config.clock = clock_mode(replay_clock);
    if (replay_config.clock == ClockMode::Wall) {
      err << "workstate replay: replay requires the logical clock\n";
      return kExitUsage;
    }
    return cmd_replay(replay_config, out, err);
  }
  if (*stress_cmd) return cmd_stress(stress, out, err);
  return kExitUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.push_back("workstate");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(storage.size()), argv.data(), out, err);
}

}  // namespace workstate::cli
