#pragma once
// Feedback fusion: per-tool exponential moving averages of success rate and
// steps used, read by the planner and updated after every subtask attempt.

#include <map>
#include <mutex>
#include <string>

#include "workstate/canonical.hpp"

namespace workstate {

inline constexpr double kPriorSuccessRate = 0.8;
inline constexpr double kPriorStepEstimate = 3.0;
inline constexpr double kDefaultAlpha = 0.3;
inline constexpr int kDefaultMaxSteps = 8;

struct StrategyState {
  std::map<std::string, double> tool_success_rate;
  std::map<std::string, double> tool_step_estimate;
  double alpha = kDefaultAlpha;

  double success_rate(const std::string& tool) const;
  double step_estimate(const std::string& tool) const;
  bool has_prior(const std::string& tool) const;

  bool operator==(const StrategyState&) const = default;
};

struct FeedbackRecord {
  std::string subtask_id;
  std::string tool;
  bool success = false;
  int planned_steps = 0;
  int actual_steps = 1;
};

struct FusedUpdate {
  double old_rate = 0;
  double new_rate = 0;
  double old_estimate = 0;
  double new_estimate = 0;
};

// rate' = (1-a)*rate + a*[success]; estimate' = clamp((1-a)*estimate + a*steps, 1, max_steps).
// Unseen tools start from the priors (0.8, 3.0). Entries for other tools are untouched.
StrategyState fuse_feedback(const StrategyState& strategy, const FeedbackRecord& fb,
                            int max_steps = kDefaultMaxSteps, FusedUpdate* update = nullptr);

// Strategy shared by concurrent workers; every update is one atomic
// read-modify-write.
class SharedStrategy {
 public:
  explicit SharedStrategy(StrategyState initial = {}) : state_(std::move(initial)) {}

  FusedUpdate apply(const FeedbackRecord& fb, int max_steps);
  StrategyState snapshot() const;
  std::size_t updates_applied() const;

 private:
  mutable std::mutex mutex_;
  StrategyState state_;
  std::size_t updates_ = 0;
};

// Strategy file codec: {alpha, tool_success_rate:{}, tool_step_estimate:{}}.
StrategyState strategy_from_value(const Value& doc);
Value strategy_to_value(const StrategyState& state);

}  // namespace workstate
