#include "doctest.h"
#include "support/scenarios.hpp"
#include "workstate/cli.hpp"

using namespace workstate;
using namespace workstate::testing;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> run_args(const std::filesystem::path& dir, const std::vector<std::string>& files,
                                  const std::string& verb = "run") {
  std::vector<std::string> args{verb};
  args.insert(args.end(), files.begin(), files.end());
  for (const std::string& a : {std::string("--ledger"), (dir / "run.wsl.jsonl").string(), std::string("--rules"),
                               (dir / "rules.reflex.json").string(), std::string("--env"),
                               (dir / "run.env.json").string()}) {
    args.push_back(a);
  }
  return args;
}

}  // namespace

TEST_CASE("run: success, abort and missing inputs") {
  const auto dir = scratch_dir("cli-run");
  auto files = stage_files(dir, {calc_task()}, {retry_rule(1)}, 2);
  auto r = invoke(run_args(dir, files));
  CHECK(r.code == 0);
  CHECK(r.out == "t-calc Completed steps=1 reflexes=0 versions=1\n");
  CHECK(invoke({"verify", (dir / "run.wsl.jsonl").string()}).code == 0);

  files = stage_files(dir, {flaky_task("t-abort", false)}, {}, 5);
  r = invoke(run_args(dir, files));
  CHECK(r.code == 2);
  CHECK(r.out == "t-abort Aborted steps=1 reflexes=0 versions=1\n");

  const auto empty = scratch_dir("cli-missing");
  r = invoke({"run", (empty / "nope.task.json").string(), "--ledger",
              (empty / "out.wsl.jsonl").string()});
  CHECK(r.code == 1);
  CHECK_FALSE(std::filesystem::exists(empty / "out.wsl.jsonl"));

  write_text(empty / "bad.task.json", "{\"id\":\"x\",");
  CHECK(invoke({"run", (empty / "bad.task.json").string(), "--ledger",
                (empty / "out.wsl.jsonl").string()})
            .code == 1);
  CHECK(invoke({"run"}).code == 1);
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
}

TEST_CASE("run persists the fused strategy") {
  const auto dir = scratch_dir("cli-strategy");
  auto files = stage_files(dir, {calc_task()}, {}, 0);
  auto args = run_args(dir, files);
  args.push_back("--strategy");
  args.push_back((dir / "strategy.json").string());
  REQUIRE(invoke(args).code == 0);
  const auto s = strategy_from_value(parse_canonical(read_text(dir / "strategy.json")));
  CHECK(s.tool_success_rate.at("calc") == doctest::Approx(0.86));
  REQUIRE(invoke(args).code == 0);
  const auto s2 = strategy_from_value(parse_canonical(read_text(dir / "strategy.json")));
  CHECK(s2.tool_success_rate.at("calc") == doctest::Approx(0.902));
}

TEST_CASE("verify: valid, tampered and empty ledgers") {
  const auto dir = scratch_dir("cli-verify");
  const auto files = stage_files(dir, {calc_task(), retry_fallback_task()}, {retry_rule(1)}, 2);
  REQUIRE(invoke(run_args(dir, files)).code == 0);
  const auto ledger = dir / "run.wsl.jsonl";
  auto r = invoke({"verify", ledger.string()});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("VALID ", 0) == 0);

  std::string text = read_text(ledger);
  const auto line5 = [&] {
    std::size_t pos = 0;
    for (int i = 0; i < 5; ++i) pos = text.find('\n', pos) + 1;
    return pos;
  }();
  const auto hash_at = text.find("\"entry_hash\":\"", line5) + 14;
  text[hash_at] = text[hash_at] == 'a' ? 'b' : 'a';
  write_text(dir / "tampered.wsl.jsonl", text);
  r = invoke({"verify", "--ledger", (dir / "tampered.wsl.jsonl").string()});
  CHECK(r.code == 2);
  CHECK(r.out.rfind("INVALID at 5:", 0) == 0);

  write_text(dir / "empty.wsl.jsonl", "");
  r = invoke({"verify", (dir / "empty.wsl.jsonl").string()});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("VALID 0 entries", 0) == 0);

  CHECK(invoke({"verify", (dir / "absent.wsl.jsonl").string()}).code == 1);
  write_text(dir / "garbage.wsl.jsonl", "not json\n");
  CHECK(invoke({"verify", (dir / "garbage.wsl.jsonl").string()}).code == 1);
}

TEST_CASE("journal: output file, invalid ledger and unwritable path") {
  const auto dir = scratch_dir("cli-journal");
  const auto files = stage_files(dir, {calc_task(), retry_fallback_task()}, {retry_rule(1)}, 2);
  REQUIRE(invoke(run_args(dir, files)).code == 0);
  const auto ledger = (dir / "run.wsl.jsonl").string();

  auto r = invoke({"journal", ledger, "-o", (dir / "run.journal.md").string()});
  CHECK(r.code == 0);
  CHECK(read_text(dir / "run.journal.md") == read_text(data_path("reference.journal.md")));
  CHECK(invoke({"journal", ledger}).out == read_text(dir / "run.journal.md"));

  std::string text = read_text(dir / "run.wsl.jsonl");
  text.replace(text.find("2+3"), 3, "2+4");
  write_text(dir / "bad.wsl.jsonl", text);
  r = invoke({"journal", (dir / "bad.wsl.jsonl").string(), "-o", (dir / "bad.journal.md").string()});
  CHECK(r.code == 2);
  CHECK_FALSE(std::filesystem::exists(dir / "bad.journal.md"));

  r = invoke({"journal", ledger, "-o", (dir / "no" / "such" / "dir.journal.md").string()});
  CHECK(r.code == 1);
}

TEST_CASE("replay: match, divergence and precondition failures") {
  const auto dir = scratch_dir("cli-replay");
  const auto files = stage_files(dir, {flaky_task("t-flaky")}, {retry_rule(3)}, 2);
  REQUIRE(invoke(run_args(dir, files)).code == 0);

  auto r = invoke(run_args(dir, files, "replay"));
  CHECK(r.code == 0);
  CHECK(r.out == "REPLAY MATCH\n");

  auto args = run_args(dir, files, "replay");
  args.insert(args.end(), {"--seed", "5"});
  r = invoke(args);
  CHECK(r.code == 2);
  CHECK(r.out.rfind("REPLAY DIVERGED at ", 0) == 0);

  const auto wall = scratch_dir("cli-replay-wall");
  const auto wall_files = stage_files(wall, {calc_task()}, {}, 0);
  auto wall_run = run_args(wall, wall_files);
  wall_run.insert(wall_run.end(), {"--clock", "wall"});
  REQUIRE(invoke(wall_run).code == 0);
  CHECK(invoke(run_args(wall, wall_files, "replay")).code == 1);

  const auto other = stage_files(dir, {calc_task("t-other")}, {retry_rule(3)}, 2);
  CHECK(invoke(run_args(dir, other, "replay")).code == 1);
}

TEST_CASE("stress: counts, solo check and preconditions") {
  const auto dir = scratch_dir("cli-stress");
  auto r = invoke({"stress", "--tasks", "10", "--subtasks", "5", "--workers", "4", "--check-solo",
                   "--ledger", (dir / "stress.wsl.jsonl").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("subtasks=50") != std::string::npos);
  CHECK(r.out.find("SOLO MATCH") != std::string::npos);

  std::istringstream in(read_text(dir / "stress.wsl.jsonl"));
  const auto entries = Ledger::read_entries(in);
  CHECK(verify_chain(entries).valid);
  CHECK(std::count_if(entries.begin(), entries.end(),
                      [](const LedgerEntry& e) { return e.kind == EntryKind::SubtaskCompleted; }) == 50);

  CHECK(invoke({"stress", "--tasks", "0", "--subtasks", "5"}).code == 1);
  CHECK(invoke({"stress", "--tasks", "3", "--subtasks", "0"}).code == 1);
}

TEST_CASE("stress workload is deterministic and chained") {
  const auto a = cli::make_stress_workload(4, 3, 9);
  const auto b = cli::make_stress_workload(4, 3, 9);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(task_to_value(a[i]) == task_to_value(b[i]));
    CHECK(a[i].subgoals.size() == 3);
    CHECK(a[i].subgoals[2].depends_on == std::vector<std::string>{a[i].subgoals[1].id});
    if (i > 0) CHECK(a[i - 1].id < a[i].id);
  }
}
