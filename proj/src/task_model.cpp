#include "workstate/task_model.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace workstate {

std::string_view to_string(SubtaskStatus status) {
  switch (status) {
    case SubtaskStatus::Pending: return "Pending";
    case SubtaskStatus::Ready: return "Ready";
    case SubtaskStatus::Running: return "Running";
    case SubtaskStatus::Done: return "Done";
    case SubtaskStatus::Failed: return "Failed";
    case SubtaskStatus::Skipped: return "Skipped";
  }
  return "Unknown";
}

bool is_allowed_transition(SubtaskStatus from, SubtaskStatus to) {
  using S = SubtaskStatus;
  switch (from) {
    case S::Pending: return to == S::Ready || to == S::Skipped;
    case S::Ready: return to == S::Running;
    case S::Running: return to == S::Done || to == S::Failed;
    case S::Done:
    case S::Failed:
    case S::Skipped: return false;
  }
  return false;
}

InvalidTransition::InvalidTransition(SubtaskStatus from, SubtaskStatus to)
    : std::logic_error("invalid subtask transition " + std::string(to_string(from)) + " -> " +
                       std::string(to_string(to))) {}

void Subtask::transition(SubtaskStatus to) {
  if (!is_allowed_transition(status, to)) throw InvalidTransition(status, to);
  status = to;
}

const Subtask* Plan::find(std::string_view id) const {
  for (const auto& st : subtasks) {
    if (st.id == id) return &st;
  }
  return nullptr;
}

Subtask* Plan::find(std::string_view id) {
  return const_cast<Subtask*>(std::as_const(*this).find(id));
}

std::string describe(const PlanError& error) {
  struct Visitor {
    std::string operator()(const plan_error::EmptyPlan&) const { return "EmptyPlan"; }
    std::string operator()(const plan_error::DuplicateId& e) const {
      return "DuplicateId(" + e.id + ")";
    }
    std::string operator()(const plan_error::UnknownDependency& e) const {
      return "UnknownDependency(" + e.from + ", " + e.to + ")";
    }
    std::string operator()(const plan_error::CyclicDependency& e) const {
      std::string out = "CyclicDependency([";
      for (std::size_t i = 0; i < e.cycle.size(); ++i) {
        if (i) out += ", ";
        out += e.cycle[i];
      }
      return out + "])";
    }
  };
  return std::visit(Visitor{}, error);
}

namespace {

// DFS over ids in sorted order; returns the first back-edge cycle found,
// rotated to start at its smallest id.
std::optional<std::vector<std::string>> find_cycle(
    const std::map<std::string, std::vector<std::string>>& deps) {
  enum class Mark { White, Grey, Black };
  std::map<std::string, Mark> mark;
  for (const auto& [id, _] : deps) mark[id] = Mark::White;
  std::vector<std::string> stack;
  std::optional<std::vector<std::string>> found;

  auto visit = [&](auto&& self, const std::string& id) -> void {
    mark[id] = Mark::Grey;
    stack.push_back(id);
    auto sorted = deps.at(id);
    std::sort(sorted.begin(), sorted.end());
    for (const auto& dep : sorted) {
      if (found) return;
      if (mark[dep] == Mark::Grey) {
        auto start = std::find(stack.begin(), stack.end(), dep);
        std::vector<std::string> cycle(start, stack.end());
        std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
        found = std::move(cycle);
        return;
      }
      if (mark[dep] == Mark::White) self(self, dep);
    }
    stack.pop_back();
    mark[id] = Mark::Black;
  };

  for (const auto& [id, _] : deps) {
    if (found) break;
    if (mark[id] == Mark::White) visit(visit, id);
  }
  return found;
}

}  // namespace

std::optional<PlanError> validate_plan(const Plan& plan) {
  if (plan.subtasks.empty()) return plan_error::EmptyPlan{};
  std::map<std::string, std::vector<std::string>> deps;
  for (const auto& st : plan.subtasks) {
    if (!deps.emplace(st.id, st.depends_on).second) return plan_error::DuplicateId{st.id};
  }
  for (const auto& st : plan.subtasks) {
    for (const auto& dep : st.depends_on) {
      if (!deps.contains(dep)) return plan_error::UnknownDependency{st.id, dep};
    }
  }
  // Each id in the reported cycle depends on the next one.
  if (auto cycle = find_cycle(deps)) return plan_error::CyclicDependency{std::move(*cycle)};
  return std::nullopt;
}

std::vector<std::string> ready_set(const Plan& plan) {
  std::vector<std::string> ready;
  for (const auto& st : plan.subtasks) {
    if (st.status != SubtaskStatus::Pending) continue;
    const bool satisfied = std::all_of(st.depends_on.begin(), st.depends_on.end(), [&](const auto& d) {
      const Subtask* dep = plan.find(d);
      return dep && dep->status == SubtaskStatus::Done;
    });
    if (satisfied) ready.push_back(st.id);
  }
  std::sort(ready.begin(), ready.end());
  return ready;
}

std::vector<std::string> topological_order(const Plan& plan) {
  std::map<std::string, int> indegree;
  std::map<std::string, std::vector<std::string>> dependents;
  for (const auto& st : plan.subtasks) {
    indegree[st.id] += static_cast<int>(st.depends_on.size());
    for (const auto& dep : st.depends_on) dependents[dep].push_back(st.id);
  }
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> available;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) available.push(id);
  }
  std::vector<std::string> order;
  order.reserve(indegree.size());
  while (!available.empty()) {
    std::string id = available.top();
    available.pop();
    for (const auto& next : dependents[id]) {
      if (--indegree[next] == 0) available.push(next);
    }
    order.push_back(std::move(id));
  }
  return order;
}

namespace {

std::string require_string(const Value& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw std::invalid_argument(std::string("task file: '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const Value& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw std::invalid_argument(std::string("task file: '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::vector<std::string> string_list(const Value& obj, const char* key) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end()) return out;
  if (!it->is_array()) {
    throw std::invalid_argument(std::string("task file: '") + key + "' must be a list");
  }
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw std::invalid_argument(std::string("task file: '") + key + "' must list strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

Task task_from_value(const Value& doc) {
  if (!doc.is_object()) throw std::invalid_argument("task file: document must be an object");
  Task task;
  task.id = require_string(doc, "id");
  task.description = doc.contains("description") ? require_string(doc, "description") : "";
  task.success_note = doc.contains("success_note") ? require_string(doc, "success_note") : "";
  auto subgoals = doc.find("subgoals");
  if (subgoals == doc.end() || !subgoals->is_array()) {
    throw std::invalid_argument("task file: 'subgoals' must be a list");
  }
  for (const auto& sg : *subgoals) {
    if (!sg.is_object()) throw std::invalid_argument("task file: subgoal must be an object");
    SubgoalSpec spec;
    spec.id = require_string(sg, "id");
    spec.description = sg.contains("description") ? require_string(sg, "description") : "";
    spec.tool_hint = optional_string(sg, "tool_hint");
    spec.fallback_tool = optional_string(sg, "fallback_tool");
    spec.depends_on = string_list(sg, "depends_on");
    if (auto args = sg.find("args"); args != sg.end()) {
      if (!args->is_object()) throw std::invalid_argument("task file: 'args' must be a map");
      spec.args = *args;
    }
    task.subgoals.push_back(std::move(spec));
  }
  return task;
}

Value task_to_value(const Task& task) {
  Value doc = Value::object();
  doc["id"] = task.id;
  doc["description"] = task.description;
  doc["success_note"] = task.success_note;
  doc["subgoals"] = Value::array();
  for (const auto& sg : task.subgoals) {
    Value v = Value::object();
    v["id"] = sg.id;
    v["description"] = sg.description;
    v["args"] = sg.args;
    v["depends_on"] = sg.depends_on;
    if (sg.tool_hint) v["tool_hint"] = *sg.tool_hint;
    if (sg.fallback_tool) v["fallback_tool"] = *sg.fallback_tool;
    doc["subgoals"].push_back(std::move(v));
  }
  return doc;
}

void validate_task(const Task& task) {
  if (task.id.empty()) throw std::invalid_argument("task id must be non-empty");
  if (task.subgoals.empty()) throw std::invalid_argument("task " + task.id + " has no subgoals");
  Plan shape{task.id, 1, {}};
  for (const auto& sg : task.subgoals) {
    Subtask st;
    st.id = sg.id;
    st.depends_on = sg.depends_on;
    shape.subtasks.push_back(std::move(st));
  }
  if (auto err = validate_plan(shape)) {
    throw std::invalid_argument("task " + task.id + ": " + describe(*err));
  }
}

Value plan_subtasks_payload(const Plan& plan) {
  Value list = Value::array();
  for (const auto& st : plan.subtasks) {
    Value v = Value::object();
    v["id"] = st.id;
    v["description"] = st.description;
    v["tool"] = st.tool;
    v["depends_on"] = st.depends_on;
    v["estimated_steps"] = st.estimated_steps;
    list.push_back(std::move(v));
  }
  return list;
}

}  // namespace workstate
