#include "workstate/strategy.hpp"

#include <algorithm>
#include <stdexcept>

namespace workstate {

double StrategyState::success_rate(const std::string& tool) const {
  auto it = tool_success_rate.find(tool);
  return it == tool_success_rate.end() ? kPriorSuccessRate : it->second;
}

double StrategyState::step_estimate(const std::string& tool) const {
  auto it = tool_step_estimate.find(tool);
  return it == tool_step_estimate.end() ? kPriorStepEstimate : it->second;
}

bool StrategyState::has_prior(const std::string& tool) const {
  return tool_step_estimate.contains(tool);
}

StrategyState fuse_feedback(const StrategyState& strategy, const FeedbackRecord& fb, int max_steps,
                            FusedUpdate* update) {
  StrategyState next = strategy;
  const double a = strategy.alpha;
  const double old_rate = strategy.success_rate(fb.tool);
  const double old_estimate = strategy.step_estimate(fb.tool);
  const double new_rate = std::clamp((1.0 - a) * old_rate + a * (fb.success ? 1.0 : 0.0), 0.0, 1.0);
  const double new_estimate = std::clamp((1.0 - a) * old_estimate + a * fb.actual_steps, 1.0,
                                         static_cast<double>(std::max(1, max_steps)));
  next.tool_success_rate[fb.tool] = new_rate;
  next.tool_step_estimate[fb.tool] = new_estimate;
  if (update) *update = {old_rate, new_rate, old_estimate, new_estimate};
  return next;
}

FusedUpdate SharedStrategy::apply(const FeedbackRecord& fb, int max_steps) {
  std::lock_guard lock(mutex_);
  FusedUpdate update;
  state_ = fuse_feedback(state_, fb, max_steps, &update);
  ++updates_;
  return update;
}

StrategyState SharedStrategy::snapshot() const {
  std::lock_guard lock(mutex_);
  return state_;
}

std::size_t SharedStrategy::updates_applied() const {
  std::lock_guard lock(mutex_);
  return updates_;
}

StrategyState strategy_from_value(const Value& doc) {
  if (!doc.is_object()) throw std::invalid_argument("strategy file: document must be an object");
  StrategyState state;
  if (auto alpha = doc.find("alpha"); alpha != doc.end()) {
    if (!alpha->is_number()) throw std::invalid_argument("strategy file: alpha must be a number");
    state.alpha = alpha->get<double>();
  }
  if (!(state.alpha > 0.0 && state.alpha < 1.0)) {
    throw std::invalid_argument("strategy file: alpha must lie in (0, 1)");
  }
  auto read_map = [&](const char* key, std::map<std::string, double>& out) {
    auto it = doc.find(key);
    if (it == doc.end()) return;
    if (!it->is_object()) throw std::invalid_argument(std::string("strategy file: ") + key + " must be a map");
    for (const auto& [tool, v] : it->items()) {
      if (!v.is_number()) throw std::invalid_argument(std::string("strategy file: ") + key + " values must be numbers");
      out[tool] = v.get<double>();
    }
  };
  read_map("tool_success_rate", state.tool_success_rate);
  read_map("tool_step_estimate", state.tool_step_estimate);
  return state;
}

Value strategy_to_value(const StrategyState& state) {
  Value doc = Value::object();
  doc["alpha"] = state.alpha;
  doc["tool_success_rate"] = state.tool_success_rate;
  doc["tool_step_estimate"] = state.tool_step_estimate;
  return doc;
}

}  // namespace workstate
