#pragma once
// Deterministic, resettable tool environment. Every tool result depends only
// on the environment seed, the tool's invocation count since the last reset,
// and the call arguments.

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "workstate/canonical.hpp"

namespace workstate {

struct ToolResult {
  bool ok = true;
  std::string output;
  std::string error_class;
  std::uint64_t cost = 1;

  static ToolResult success(std::string output) { return {true, std::move(output), "", 1}; }
  static ToolResult failure(std::string error_class, std::string output = "") {
    return {false, std::move(output), std::move(error_class), 1};
  }

  bool operator==(const ToolResult&) const = default;
};

class Tool {
 public:
  virtual ~Tool() = default;
  virtual std::string_view name() const = 0;
  virtual std::string describe() const = 0;
  virtual ToolResult invoke(const Value& args) = 0;
  // Restores the tool to its freshly constructed state.
  virtual void reset() {}
};

class BadConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FlakyConfig {
  std::int64_t fail_count = 0;
  std::string error_class = "transient";
};

struct EnvConfig {
  std::uint64_t seed = 0;
  FlakyConfig flaky;
  // Extra tools registered after the built-ins; names must not collide.
  std::vector<std::shared_ptr<Tool>> extra_tools;
};

// `.env.json` codec: {seed, flaky:{fail_count, error_class}}.
EnvConfig env_config_from_value(const Value& doc);
Value env_config_to_value(const EnvConfig& config);

class Environment {
 public:
  // Registers calc, kvstore, echo and flaky plus any extra tools.
  // Throws BadConfig on a negative fail_count or duplicate tool names.
  explicit Environment(EnvConfig config);

  Environment(const Environment&) = delete;
  Environment& operator=(const Environment&) = delete;

  std::uint64_t seed() const { return config_.seed; }
  const EnvConfig& config() const { return config_; }

  bool has_tool(std::string_view name) const;
  std::vector<std::string> tool_names() const;
  // Throws std::out_of_range for unregistered tools.
  ToolResult invoke(std::string_view tool, const Value& args);
  std::uint64_t invocations(std::string_view tool) const;

  // Zeroes invocation counters and empties the store; the seed is retained.
  void reset();

 private:
  EnvConfig config_;
  std::map<std::string, std::shared_ptr<Tool>, std::less<>> registry_;
  std::map<std::string, std::uint64_t, std::less<>> counters_;
};

std::unique_ptr<Environment> make_env(std::uint64_t seed, FlakyConfig flaky = {});

// Result of evaluating an infix expression over decimals.
struct CalcOutcome {
  bool ok = true;
  std::string output;       // formatted value when ok
  std::string error_class;  // "parse" or "math" otherwise
  std::string message;
};

// Evaluates + - * / (also the Unicode minus, times and division signs),
// unary minus and parentheses with the usual precedence, left-associative.
// Division by zero is reported with error_class "math".
CalcOutcome calc_eval(std::string_view expr);

}  // namespace workstate
