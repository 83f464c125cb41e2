#pragma once
// Work state ledger: an append-only, SHA-256 hash-chained record of every
// cognitive event of every task.
//
// Hash input for entry n is the canonical serialization of the object
//   {kind, payload, prev_hash, seq, task_id, timestamp, worker_id}
// and each exported line is the canonical serialization of the same object
// plus entry_hash. Entry 0 links to kGenesisHash.

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "workstate/canonical.hpp"

namespace workstate {

inline const std::string kGenesisHash(64, '0');

enum class EntryKind {
  TaskReceived,
  PlanCreated,
  PlanRevised,
  ThoughtRecorded,
  ActionDispatched,
  ObservationRecorded,
  ReflexTriggered,
  SubtaskCompleted,
  SubtaskFailed,
  FeedbackFused,
  TaskCompleted,
  TaskAborted,
};

std::string_view to_string(EntryKind kind);
std::optional<EntryKind> parse_entry_kind(std::string_view name);

struct LedgerEntry {
  std::uint64_t seq = 0;
  std::string timestamp;
  std::string worker_id;
  std::string task_id;
  EntryKind kind = EntryKind::TaskReceived;
  Value payload = Value::object();
  std::string prev_hash;
  std::string entry_hash;

  bool operator==(const LedgerEntry&) const = default;
};

// Everything the caller supplies; the ledger assigns the rest when sealing.
struct EntryDraft {
  EntryKind kind = EntryKind::TaskReceived;
  Value payload = Value::object();
  std::string worker_id;
  std::string task_id;
};

class SchemaViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LedgerSealed : public std::runtime_error {
 public:
  LedgerSealed() : std::runtime_error("ledger is sealed") {}
};

class TaskNotFound : public std::runtime_error {
 public:
  explicit TaskNotFound(const std::string& task_id)
      : std::runtime_error("task not found: " + task_id), task_id_(task_id) {}
  const std::string& task_id() const { return task_id_; }

 private:
  std::string task_id_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  // 1-based line number within the source stream.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Throws SchemaViolation when `payload` lacks a required key for `kind` or a
// required key has the wrong type. Extra keys are allowed.
void check_payload_schema(EntryKind kind, const Value& payload);

// Time source for entry timestamps, in milliseconds since the Unix epoch.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() = 0;
};

// Counter clock: the n-th reading is n milliseconds after the epoch.
class LogicalClock final : public Clock {
 public:
  std::int64_t now_ms() override { return next_.fetch_add(1); }

 private:
  std::atomic<std::int64_t> next_{0};
};

class WallClock final : public Clock {
 public:
  std::int64_t now_ms() override;
};

std::string hash_input(const LedgerEntry& entry);
std::string compute_entry_hash(const LedgerEntry& entry);
std::string serialize_line(const LedgerEntry& entry);
// Parses one exported line; throws std::invalid_argument on any format
// problem (field set, types, unknown kind, non-hex digests).
LedgerEntry parse_line(std::string_view line);

enum class VerifyFailure { None, Malformed, SeqGap, BrokenLink, HashMismatch };
std::string_view to_string(VerifyFailure reason);

struct VerifyReport {
  bool valid = true;
  std::optional<std::size_t> first_bad_index;
  VerifyFailure reason = VerifyFailure::None;
  std::string detail;
};

VerifyReport verify_chain(std::span<const LedgerEntry> entries);
// Verifies exported lines directly; a line that does not parse is reported
// as Malformed at its index.
VerifyReport verify_lines(std::span<const std::string> lines);

// True when every timestamp equals the logical clock reading for its seq,
// i.e. the ledger was produced by a single LogicalClock.
bool uses_logical_clock(std::span<const LedgerEntry> entries);

class Ledger {
 public:
  Ledger() = default;
  Ledger(const Ledger&) = delete;
  Ledger& operator=(const Ledger&) = delete;

  // Appends are linearizable: sealing (seq, timestamp, prev_hash, hash) and
  // publication happen under one lock.
  LedgerEntry append(const EntryDraft& draft, Clock& clock);

  // After close(), append throws LedgerSealed.
  void close();
  bool closed() const;

  std::size_t size() const;
  std::string head_hash() const;
  // Consistent prefix of the ledger at the time of the call.
  std::vector<LedgerEntry> snapshot() const;

  VerifyReport verify() const;

  void export_to(std::ostream& sink) const;

  // Reads line-delimited records and verifies the chain.
  // Throws ParseError or ChainInvalid.
  static Ledger import_from(std::istream& source);
  // Same, without the verification step.
  static std::vector<LedgerEntry> read_entries(std::istream& source);

 private:
  explicit Ledger(std::vector<LedgerEntry> entries) : entries_(std::move(entries)) {}

  mutable std::mutex mutex_;
  std::vector<LedgerEntry> entries_;
  bool closed_ = false;
};

class ChainInvalid : public std::runtime_error {
 public:
  explicit ChainInvalid(VerifyReport report);
  const VerifyReport& report() const { return report_; }

 private:
  VerifyReport report_;
};

enum class TaskPhase { Received, Planned, Executing, Completed, Aborted };
std::string_view to_string(TaskPhase phase);

struct WorkStateView {
  std::string task_id;
  TaskPhase phase = TaskPhase::Received;
  std::optional<int> plan_version;
  // Subtask id -> status name (Pending, Running, Done, Failed).
  std::map<std::string, std::string> subtask_statuses;
  int steps_taken = 0;
  int reflexes_fired = 0;
  int revisions = 0;

  bool operator==(const WorkStateView&) const = default;
};

// Folds the entries carrying `task_id` in seq order. Throws TaskNotFound.
WorkStateView reconstruct_state(std::span<const LedgerEntry> entries,
                                std::string_view task_id);

}  // namespace workstate
