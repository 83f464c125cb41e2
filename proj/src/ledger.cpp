#include "workstate/ledger.hpp"

#include <array>
#include <chrono>
#include <istream>
#include <ostream>
#include <utility>

namespace workstate {
namespace {

constexpr std::array<std::pair<EntryKind, std::string_view>, 12> kKindNames{{
    {EntryKind::TaskReceived, "TaskReceived"},
    {EntryKind::PlanCreated, "PlanCreated"},
    {EntryKind::PlanRevised, "PlanRevised"},
    {EntryKind::ThoughtRecorded, "ThoughtRecorded"},
    {EntryKind::ActionDispatched, "ActionDispatched"},
    {EntryKind::ObservationRecorded, "ObservationRecorded"},
    {EntryKind::ReflexTriggered, "ReflexTriggered"},
    {EntryKind::SubtaskCompleted, "SubtaskCompleted"},
    {EntryKind::SubtaskFailed, "SubtaskFailed"},
    {EntryKind::FeedbackFused, "FeedbackFused"},
    {EntryKind::TaskCompleted, "TaskCompleted"},
    {EntryKind::TaskAborted, "TaskAborted"},
}};

enum class FieldType { Int, Number, Bool, String, Array, Object };

struct Field {
  std::string_view key;
  FieldType type;
};

bool has_type(const Value& v, FieldType type) {
  switch (type) {
    case FieldType::Int: return v.is_number_integer();
    case FieldType::Number: return v.is_number();
    case FieldType::Bool: return v.is_boolean();
    case FieldType::String: return v.is_string();
    case FieldType::Array: return v.is_array();
    case FieldType::Object: return v.is_object();
  }
  return false;
}

void require(const Value& obj, std::initializer_list<Field> fields, std::string_view where) {
  if (!obj.is_object()) {
    throw SchemaViolation(std::string(where) + ": payload must be an object");
  }
  for (const auto& f : fields) {
    auto it = obj.find(f.key);
    if (it == obj.end()) {
      throw SchemaViolation(std::string(where) + ": missing required field '" +
                            std::string(f.key) + "'");
    }
    if (!has_type(*it, f.type)) {
      throw SchemaViolation(std::string(where) + ": field '" + std::string(f.key) +
                            "' has the wrong type");
    }
  }
}

void require_string_array(const Value& arr, std::string_view where) {
  for (const auto& item : arr) {
    if (!item.is_string()) {
      throw SchemaViolation(std::string(where) + ": expected a list of ids");
    }
  }
}

}  // namespace

std::string_view to_string(EntryKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "Unknown";
}

std::optional<EntryKind> parse_entry_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

void check_payload_schema(EntryKind kind, const Value& payload) {
  using T = FieldType;
  const std::string where(to_string(kind));
  switch (kind) {
    case EntryKind::TaskReceived:
      require(payload, {{"description", T::String}}, where);
      break;
    case EntryKind::PlanCreated:
      require(payload, {{"plan_version", T::Int}, {"subtasks", T::Array}}, where);
      for (const auto& st : payload["subtasks"]) {
        require(st,
                {{"id", T::String},
                 {"description", T::String},
                 {"tool", T::String},
                 {"depends_on", T::Array},
                 {"estimated_steps", T::Int}},
                where + ".subtasks[]");
        require_string_array(st["depends_on"], where);
      }
      break;
    case EntryKind::PlanRevised:
      require(payload,
              {{"plan_version", T::Int}, {"reason", T::String}, {"changed_subtasks", T::Array}},
              where);
      require_string_array(payload["changed_subtasks"], where);
      break;
    case EntryKind::ThoughtRecorded:
      require(payload, {{"subtask_id", T::String}, {"step", T::Int}, {"text", T::String}},
              where);
      break;
    case EntryKind::ActionDispatched:
      require(payload,
              {{"subtask_id", T::String}, {"step", T::Int}, {"tool", T::String}, {"args", T::Object}},
              where);
      break;
    case EntryKind::ObservationRecorded:
      require(payload,
              {{"subtask_id", T::String},
               {"step", T::Int},
               {"ok", T::Bool},
               {"output", T::String},
               {"error_class", T::String}},
              where);
      break;
    case EntryKind::ReflexTriggered:
      require(payload,
              {{"subtask_id", T::String}, {"step", T::Int}, {"rule_id", T::String}, {"reflex", T::String}},
              where);
      break;
    case EntryKind::SubtaskCompleted:
    case EntryKind::SubtaskFailed:
      require(payload,
              {{"subtask_id", T::String}, {"steps_used", T::Int}, {"reason", T::String}}, where);
      break;
    case EntryKind::FeedbackFused:
      require(payload,
              {{"subtask_id", T::String},
               {"tool", T::String},
               {"old_rate", T::Number},
               {"new_rate", T::Number},
               {"old_estimate", T::Number},
               {"new_estimate", T::Number}},
              where);
      break;
    case EntryKind::TaskCompleted:
      require(payload, {}, where);
      break;
    case EntryKind::TaskAborted:
      require(payload, {{"reason", T::String}}, where);
      break;
  }
}

std::int64_t WallClock::now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

namespace {

Value covered_fields(const LedgerEntry& e) {
  Value obj = Value::object();
  obj["seq"] = e.seq;
  obj["timestamp"] = e.timestamp;
  obj["worker_id"] = e.worker_id;
  obj["task_id"] = e.task_id;
  obj["kind"] = std::string(to_string(e.kind));
  obj["payload"] = e.payload;
  obj["prev_hash"] = e.prev_hash;
  return obj;
}

const std::string& string_field(const Value& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw std::invalid_argument(std::string("field '") + key + "' missing or not a string");
  }
  return it->get_ref<const std::string&>();
}

}  // namespace

std::string hash_input(const LedgerEntry& entry) { return canonical_dump(covered_fields(entry)); }

std::string compute_entry_hash(const LedgerEntry& entry) { return sha256_hex(hash_input(entry)); }

std::string serialize_line(const LedgerEntry& entry) {
  Value obj = covered_fields(entry);
  obj["entry_hash"] = entry.entry_hash;
  return canonical_dump(obj);
}

LedgerEntry parse_line(std::string_view line) {
  const Value obj = parse_canonical(line);
  if (!obj.is_object()) throw std::invalid_argument("record is not an object");
  if (obj.size() != 8) throw std::invalid_argument("record must have exactly 8 fields");
  LedgerEntry e;
  auto seq = obj.find("seq");
  if (seq == obj.end() || !seq->is_number_unsigned()) {
    throw std::invalid_argument("field 'seq' missing or not a non-negative integer");
  }
  e.seq = seq->get<std::uint64_t>();
  e.timestamp = string_field(obj, "timestamp");
  e.worker_id = string_field(obj, "worker_id");
  e.task_id = string_field(obj, "task_id");
  const auto kind = parse_entry_kind(string_field(obj, "kind"));
  if (!kind) throw std::invalid_argument("unknown entry kind");
  e.kind = *kind;
  auto payload = obj.find("payload");
  if (payload == obj.end() || !payload->is_object()) {
    throw std::invalid_argument("field 'payload' missing or not an object");
  }
  e.payload = *payload;
  e.prev_hash = string_field(obj, "prev_hash");
  e.entry_hash = string_field(obj, "entry_hash");
  if (!is_lower_hex(e.prev_hash, 64)) throw std::invalid_argument("prev_hash is not 64 lowercase hex");
  if (!is_lower_hex(e.entry_hash, 64)) throw std::invalid_argument("entry_hash is not 64 lowercase hex");
  return e;
}

std::string_view to_string(VerifyFailure reason) {
  switch (reason) {
    case VerifyFailure::None: return "None";
    case VerifyFailure::Malformed: return "Malformed";
    case VerifyFailure::SeqGap: return "SeqGap";
    case VerifyFailure::BrokenLink: return "BrokenLink";
    case VerifyFailure::HashMismatch: return "HashMismatch";
  }
  return "Unknown";
}

namespace {

VerifyReport fail(std::size_t index, VerifyFailure reason, std::string detail) {
  return VerifyReport{false, index, reason, std::move(detail)};
}

// Checks entry i given the hash of entry i-1.
VerifyReport check_entry(const LedgerEntry& e, std::size_t i, const std::string& expected_prev) {
  if (!is_lower_hex(e.prev_hash, 64) || !is_lower_hex(e.entry_hash, 64)) {
    return fail(i, VerifyFailure::Malformed, "digest is not 64 lowercase hex characters");
  }
  if (e.seq != i) {
    return fail(i, VerifyFailure::SeqGap,
                "expected seq " + std::to_string(i) + ", found " + std::to_string(e.seq));
  }
  if (e.prev_hash != expected_prev) {
    return fail(i, VerifyFailure::BrokenLink, "prev_hash does not match the previous entry");
  }
  std::string recomputed;
  try {
    recomputed = compute_entry_hash(e);
  } catch (const std::exception& ex) {
    return fail(i, VerifyFailure::Malformed, ex.what());
  }
  if (recomputed != e.entry_hash) {
    return fail(i, VerifyFailure::HashMismatch, "recomputed hash " + recomputed);
  }
  return {};
}

}  // namespace

VerifyReport verify_chain(std::span<const LedgerEntry> entries) {
  const std::string* prev = &kGenesisHash;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto report = check_entry(entries[i], i, *prev);
    if (!report.valid) return report;
    prev = &entries[i].entry_hash;
  }
  return {};
}

VerifyReport verify_lines(std::span<const std::string> lines) {
  std::string prev = kGenesisHash;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    LedgerEntry e;
    try {
      e = parse_line(lines[i]);
    } catch (const std::exception& ex) {
      return fail(i, VerifyFailure::Malformed, ex.what());
    }
    auto report = check_entry(e, i, prev);
    if (!report.valid) return report;
    prev = std::move(e.entry_hash);
  }
  return {};
}

bool uses_logical_clock(std::span<const LedgerEntry> entries) {
  for (const auto& e : entries) {
    if (e.timestamp != format_timestamp(static_cast<std::int64_t>(e.seq))) return false;
  }
  return true;
}

LedgerEntry Ledger::append(const EntryDraft& draft, Clock& clock) {
  check_payload_schema(draft.kind, draft.payload);
  LedgerEntry e;
  e.worker_id = draft.worker_id;
  e.task_id = draft.task_id;
  e.kind = draft.kind;
  e.payload = draft.payload;

  std::lock_guard lock(mutex_);
  if (closed_) throw LedgerSealed();
  e.seq = entries_.size();
  e.timestamp = format_timestamp(clock.now_ms());
  e.prev_hash = entries_.empty() ? kGenesisHash : entries_.back().entry_hash;
  e.entry_hash = compute_entry_hash(e);
  entries_.push_back(e);
  return e;
}

void Ledger::close() {
  std::lock_guard lock(mutex_);
  closed_ = true;
}

bool Ledger::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

std::size_t Ledger::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::string Ledger::head_hash() const {
  std::lock_guard lock(mutex_);
  return entries_.empty() ? kGenesisHash : entries_.back().entry_hash;
}

std::vector<LedgerEntry> Ledger::snapshot() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

VerifyReport Ledger::verify() const {
  const auto entries = snapshot();
  return verify_chain(entries);
}

void Ledger::export_to(std::ostream& sink) const {
  for (const auto& e : snapshot()) sink << serialize_line(e) << '\n';
}

std::vector<LedgerEntry> Ledger::read_entries(std::istream& source) {
  std::vector<LedgerEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (source.eof() && line.empty()) break;
    try {
      entries.push_back(parse_line(line));
    } catch (const std::exception& ex) {
      throw ParseError(line_no, ex.what());
    }
  }
  return entries;
}

Ledger Ledger::import_from(std::istream& source) {
  auto entries = read_entries(source);
  auto report = verify_chain(entries);
  if (!report.valid) throw ChainInvalid(std::move(report));
  return Ledger(std::move(entries));
}

ChainInvalid::ChainInvalid(VerifyReport report)
    : std::runtime_error("chain invalid at index " +
                         std::to_string(report.first_bad_index.value_or(0)) + ": " +
                         std::string(to_string(report.reason))),
      report_(std::move(report)) {}

std::string_view to_string(TaskPhase phase) {
  switch (phase) {
    case TaskPhase::Received: return "Received";
    case TaskPhase::Planned: return "Planned";
    case TaskPhase::Executing: return "Executing";
    case TaskPhase::Completed: return "Completed";
    case TaskPhase::Aborted: return "Aborted";
  }
  return "Unknown";
}

WorkStateView reconstruct_state(std::span<const LedgerEntry> entries, std::string_view task_id) {
  WorkStateView view;
  view.task_id = std::string(task_id);
  bool found = false;
  for (const auto& e : entries) {
    if (e.task_id != task_id) continue;
    found = true;
    const Value& p = e.payload;
    switch (e.kind) {
      case EntryKind::TaskReceived:
        view.phase = TaskPhase::Received;
        break;
      case EntryKind::PlanCreated:
        view.phase = TaskPhase::Planned;
        view.plan_version = p.value("plan_version", 1);
        view.subtask_statuses.clear();
        for (const auto& st : p.value("subtasks", Value::array())) {
          view.subtask_statuses[st.value("id", "")] = "Pending";
        }
        break;
      case EntryKind::PlanRevised:
        view.plan_version = p.value("plan_version", view.plan_version.value_or(0) + 1);
        ++view.revisions;
        for (const auto& id : p.value("changed_subtasks", Value::array())) {
          if (id.is_string()) view.subtask_statuses[id.get<std::string>()] = "Pending";
        }
        break;
      case EntryKind::ActionDispatched:
        if (view.phase == TaskPhase::Planned) view.phase = TaskPhase::Executing;
        ++view.steps_taken;
        view.subtask_statuses[p.value("subtask_id", "")] = "Running";
        break;
      case EntryKind::ReflexTriggered:
        ++view.reflexes_fired;
        break;
      case EntryKind::SubtaskCompleted:
        view.subtask_statuses[p.value("subtask_id", "")] = "Done";
        break;
      case EntryKind::SubtaskFailed:
        view.subtask_statuses[p.value("subtask_id", "")] = "Failed";
        break;
      case EntryKind::TaskCompleted:
        view.phase = TaskPhase::Completed;
        break;
      case EntryKind::TaskAborted:
        view.phase = TaskPhase::Aborted;
        break;
      case EntryKind::ThoughtRecorded:
      case EntryKind::ObservationRecorded:
      case EntryKind::FeedbackFused:
        break;
    }
  }
  if (!found) throw TaskNotFound(std::string(task_id));
  return view;
}

}  // namespace workstate
