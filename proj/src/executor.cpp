#include "workstate/executor.hpp"

#include <algorithm>
#include <set>

namespace workstate {

std::string describe(const Reflex& r) {
  struct Visitor {
    std::string operator()(const reflex::Retry&) const { return "retry"; }
    std::string operator()(const reflex::SubstituteTool& s) const { return "substitute_tool:" + s.tool; }
    std::string operator()(const reflex::AdjustArgs& a) const {
      return "adjust_args:" + canonical_dump(a.patch);
    }
    std::string operator()(const reflex::AbortSubtask&) const { return "abort_subtask"; }
  };
  return std::visit(Visitor{}, r);
}

std::vector<ReflexRule> reflex_rules_from_value(const Value& doc) {
  if (!doc.is_array()) throw std::invalid_argument("reflex rules: document must be a list");
  std::vector<ReflexRule> rules;
  std::set<std::string> ids;
  for (const auto& v : doc) {
    if (!v.is_object()) throw std::invalid_argument("reflex rules: each rule must be a map");
    auto str = [&](const char* key) {
      auto it = v.find(key);
      if (it == v.end() || !it->is_string()) {
        throw std::invalid_argument(std::string("reflex rules: '") + key + "' must be a string");
      }
      return it->get<std::string>();
    };
    ReflexRule rule;
    rule.id = str("id");
    rule.trigger = str("trigger");
    if (auto p = v.find("priority"); p != v.end()) {
      if (!p->is_number_integer()) throw std::invalid_argument("reflex rules: priority must be an integer");
      rule.priority = p->get<int>();
    }
    const std::string kind = str("reflex");
    if (kind == "Retry") {
      auto m = v.find("max_retries");
      if (m == v.end() || !m->is_number_integer() || m->get<int>() < 1) {
        throw std::invalid_argument("reflex rules: Retry needs max_retries >= 1");
      }
      rule.reflex = reflex::Retry{m->get<int>()};
    } else if (kind == "SubstituteTool") {
      rule.reflex = reflex::SubstituteTool{str("tool")};
    } else if (kind == "AdjustArgs") {
      auto p = v.find("patch");
      if (p == v.end() || !p->is_object()) throw std::invalid_argument("reflex rules: AdjustArgs needs a patch map");
      rule.reflex = reflex::AdjustArgs{*p};
    } else if (kind == "AbortSubtask") {
      rule.reflex = reflex::AbortSubtask{};
    } else {
      throw std::invalid_argument("reflex rules: unknown reflex '" + kind + "'");
    }
    if (!ids.insert(rule.id).second) throw std::invalid_argument("reflex rules: duplicate id " + rule.id);
    rules.push_back(std::move(rule));
  }
  return rules;
}

Value reflex_rules_to_value(std::span<const ReflexRule> rules) {
  Value doc = Value::array();
  for (const auto& rule : rules) {
    Value v = {{"id", rule.id}, {"priority", rule.priority}, {"trigger", rule.trigger}};
    std::visit(
        [&](const auto& r) {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, reflex::Retry>) {
            v["reflex"] = "Retry";
            v["max_retries"] = r.max_retries;
          } else if constexpr (std::is_same_v<R, reflex::SubstituteTool>) {
            v["reflex"] = "SubstituteTool";
            v["tool"] = r.tool;
          } else if constexpr (std::is_same_v<R, reflex::AdjustArgs>) {
            v["reflex"] = "AdjustArgs";
            v["patch"] = r.patch;
          } else {
            v["reflex"] = "AbortSubtask";
          }
        },
        rule.reflex);
    doc.push_back(std::move(v));
  }
  return doc;
}

const ReflexRule* apply_reflex(const std::string& error_class, std::span<const ReflexRule> rules,
                               const std::map<std::string, int>& retries_so_far) {
  const ReflexRule* best = nullptr;
  for (const auto& rule : rules) {
    if (rule.trigger != "*" && rule.trigger != error_class) continue;
    if (const auto* retry = std::get_if<reflex::Retry>(&rule.reflex)) {
      auto it = retries_so_far.find(rule.id);
      if (it != retries_so_far.end() && it->second >= retry->max_retries) continue;
    }
    if (!best || rule.priority < best->priority ||
        (rule.priority == best->priority && rule.id < best->id)) {
      best = &rule;
    }
  }
  return best;
}

bool StepRecorder::permits(EntryKind kind) {
  switch (kind) {
    case EntryKind::ThoughtRecorded:
    case EntryKind::ActionDispatched:
    case EntryKind::ObservationRecorded:
    case EntryKind::ReflexTriggered:
    case EntryKind::SubtaskCompleted:
    case EntryKind::SubtaskFailed:
      return true;
    default:
      return false;
  }
}

void StepRecorder::record(EntryKind kind, Value payload) const {
  if (!permits(kind)) {
    throw std::logic_error("executor may not record " + std::string(to_string(kind)));
  }
  sink_(kind, std::move(payload));
}

namespace {

struct RecorderFailure {};

}  // namespace

SubtaskOutcome execute_subtask(const Subtask& subtask, Environment& tools,
                               std::span<const ReflexRule> rules, int max_steps,
                               const StepRecorder& recorder) {
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (!tools.has_tool(subtask.tool)) throw UnregisteredTool(subtask.tool);
  for (const auto& rule : rules) {
    if (const auto* sub = std::get_if<reflex::SubstituteTool>(&rule.reflex)) {
      if (!tools.has_tool(sub->tool)) throw UnregisteredTool(sub->tool);
    }
  }

  SubtaskOutcome outcome;
  outcome.subtask_id = subtask.id;

  auto emit = [&](EntryKind kind, Value payload) {
    try {
      recorder.record(kind, std::move(payload));
    } catch (const std::logic_error&) {
      throw;
    } catch (const std::exception&) {
      throw RecorderFailure{};
    }
  };

  std::string tool = subtask.tool;
  Value args = subtask.args.is_object() ? subtask.args : Value::object();
  std::string annotation;
  std::map<std::string, int> retries;
  int step = 0;

  try {
    while (true) {
      ++step;
      ReActStep record;
      record.step = step;
      record.thought = "step " + std::to_string(step) + ": invoking " + tool + " for " +
                       subtask.description + annotation;
      record.tool = tool;
      record.args = args;
      annotation.clear();

      emit(EntryKind::ThoughtRecorded,
           {{"subtask_id", subtask.id}, {"step", step}, {"text", record.thought}});
      emit(EntryKind::ActionDispatched,
           {{"subtask_id", subtask.id}, {"step", step}, {"tool", tool}, {"args", args}});
      const ToolResult obs = tools.invoke(tool, args);
      record.observation = obs;
      emit(EntryKind::ObservationRecorded, {{"subtask_id", subtask.id},
                                            {"step", step},
                                            {"ok", obs.ok},
                                            {"output", obs.output},
                                            {"error_class", obs.ok ? "" : obs.error_class}});
      outcome.transcript.push_back(std::move(record));
      outcome.steps_used = step;

      if (obs.ok) {
        outcome.status = SubtaskStatus::Done;
        outcome.last_error_class.clear();
        break;
      }
      outcome.last_error_class = obs.error_class;
      if (step >= max_steps) {
        outcome.reason = kBudgetExhausted;
        break;
      }
      const ReflexRule* rule = apply_reflex(obs.error_class, rules, retries);
      if (!rule) {
        outcome.reason = "no reflex for " + obs.error_class;
        break;
      }
      ++outcome.reflexes_fired;
      emit(EntryKind::ReflexTriggered, {{"subtask_id", subtask.id},
                                        {"step", step},
                                        {"rule_id", rule->id},
                                        {"reflex", describe(rule->reflex)}});
      bool aborted = false;
      std::visit(
          [&](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, reflex::Retry>) {
              ++retries[rule->id];
            } else if constexpr (std::is_same_v<R, reflex::SubstituteTool>) {
              tool = r.tool;
              annotation = " [reflex " + rule->id + ": substituted " + r.tool + "]";
            } else if constexpr (std::is_same_v<R, reflex::AdjustArgs>) {
              for (const auto& [key, value] : r.patch.items()) args[key] = value;
              annotation = " [reflex " + rule->id + ": adjusted args]";
            } else {
              aborted = true;
            }
          },
          rule->reflex);
      if (aborted) {
        outcome.reason = "aborted by reflex " + rule->id;
        break;
      }
    }

    emit(outcome.status == SubtaskStatus::Done ? EntryKind::SubtaskCompleted : EntryKind::SubtaskFailed,
         {{"subtask_id", subtask.id}, {"steps_used", outcome.steps_used}, {"reason", outcome.reason}});
  } catch (const RecorderFailure&) {
    outcome.status = SubtaskStatus::Failed;
    outcome.steps_used = std::max(1, std::max(outcome.steps_used, step));
    outcome.reason = kLedgerUnavailable;
  }
  return outcome;
}

}  // namespace workstate
