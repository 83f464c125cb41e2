#include "workstate/simenv.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <optional>

namespace workstate {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string arg_text(const Value& args, const char* key) {
  auto it = args.find(key);
  if (it == args.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  return canonical_dump(*it);
}

class CalcTool final : public Tool {
 public:
  std::string_view name() const override { return "calc"; }
  std::string describe() const override {
    return "calc: evaluates args.expr, an arithmetic expression over decimals";
  }
  ToolResult invoke(const Value& args) override {
    if (!args.contains("expr")) return ToolResult::failure("bad_args", "missing expr");
    auto r = calc_eval(arg_text(args, "expr"));
    if (r.ok) return ToolResult::success(std::move(r.output));
    return ToolResult::failure(r.error_class, r.message);
  }
};

class KvStoreTool final : public Tool {
 public:
  std::string_view name() const override { return "kvstore"; }
  std::string describe() const override {
    return "kvstore: op=put stores args.v under args.k; op=get returns the value for args.k";
  }
  ToolResult invoke(const Value& args) override {
    const std::string op = arg_text(args, "op");
    const std::string key = arg_text(args, "k");
    if (op == "put") {
      store_[key] = arg_text(args, "v");
      return ToolResult::success("stored " + key);
    }
    if (op == "get") {
      auto it = store_.find(key);
      if (it == store_.end()) return ToolResult::failure("not_found", "no value for " + key);
      return ToolResult::success(it->second);
    }
    return ToolResult::failure("bad_args", "unknown op '" + op + "'");
  }
  void reset() override { store_.clear(); }

 private:
  std::map<std::string, std::string> store_;
};

class EchoTool final : public Tool {
 public:
  std::string_view name() const override { return "echo"; }
  std::string describe() const override { return "echo: returns args.text"; }
  ToolResult invoke(const Value& args) override { return ToolResult::success(arg_text(args, "text")); }
};

class FlakyTool final : public Tool {
 public:
  FlakyTool(std::uint64_t seed, FlakyConfig config) : seed_(seed), config_(std::move(config)) {}

  std::string_view name() const override { return "flaky"; }
  std::string describe() const override {
    return "flaky: fails its first " + std::to_string(config_.fail_count) +
           " invocations with '" + config_.error_class + "', then echoes args.text";
  }
  ToolResult invoke(const Value& args) override {
    const std::uint64_t n = ++count_;
    if (static_cast<std::int64_t>(n) <= config_.fail_count) {
      return ToolResult::failure(config_.error_class, "invocation " + std::to_string(n) + " failed");
    }
    std::string text = arg_text(args, "text");
    if (text.empty()) text = "ok";
    char nonce[24];
    std::snprintf(nonce, sizeof(nonce), "%08llx",
                  static_cast<unsigned long long>(splitmix64(seed_ ^ splitmix64(n)) >> 32));
    return ToolResult::success(text + " (nonce " + nonce + ")");
  }
  void reset() override { count_ = 0; }

 private:
  std::uint64_t seed_;
  FlakyConfig config_;
  std::uint64_t count_ = 0;
};

}  // namespace

EnvConfig env_config_from_value(const Value& doc) {
  if (!doc.is_object()) throw BadConfig("env config: document must be an object");
  EnvConfig config;
  if (auto seed = doc.find("seed"); seed != doc.end()) {
    if (!seed->is_number_unsigned()) throw BadConfig("env config: seed must be a non-negative integer");
    config.seed = seed->get<std::uint64_t>();
  }
  if (auto flaky = doc.find("flaky"); flaky != doc.end()) {
    if (!flaky->is_object()) throw BadConfig("env config: flaky must be a map");
    if (auto fc = flaky->find("fail_count"); fc != flaky->end()) {
      if (!fc->is_number_integer()) throw BadConfig("env config: fail_count must be an integer");
      config.flaky.fail_count = fc->get<std::int64_t>();
    }
    if (auto ec = flaky->find("error_class"); ec != flaky->end()) {
      if (!ec->is_string() || ec->get<std::string>().empty()) {
        throw BadConfig("env config: error_class must be a non-empty string");
      }
      config.flaky.error_class = ec->get<std::string>();
    }
  }
  if (config.flaky.fail_count < 0) throw BadConfig("env config: fail_count must be >= 0");
  return config;
}

Value env_config_to_value(const EnvConfig& config) {
  Value doc = Value::object();
  doc["seed"] = config.seed;
  doc["flaky"] = {{"fail_count", config.flaky.fail_count},
                  {"error_class", config.flaky.error_class}};
  return doc;
}

Environment::Environment(EnvConfig config) : config_(std::move(config)) {
  if (config_.flaky.fail_count < 0) throw BadConfig("flaky fail_count must be >= 0");
  if (config_.flaky.error_class.empty()) throw BadConfig("flaky error_class must be non-empty");
  std::vector<std::shared_ptr<Tool>> tools{
      std::make_shared<CalcTool>(), std::make_shared<KvStoreTool>(), std::make_shared<EchoTool>(),
      std::make_shared<FlakyTool>(config_.seed, config_.flaky)};
  tools.insert(tools.end(), config_.extra_tools.begin(), config_.extra_tools.end());
  for (auto& tool : tools) {
    std::string name(tool->name());
    if (!registry_.emplace(name, tool).second) throw BadConfig("duplicate tool name: " + name);
    counters_[name] = 0;
  }
}

bool Environment::has_tool(std::string_view name) const { return registry_.find(name) != registry_.end(); }

std::vector<std::string> Environment::tool_names() const {
  std::vector<std::string> names;
  for (const auto& [name, _] : registry_) names.push_back(name);
  return names;
}

ToolResult Environment::invoke(std::string_view tool, const Value& args) {
  auto it = registry_.find(tool);
  if (it == registry_.end()) throw std::out_of_range("unregistered tool: " + std::string(tool));
  ++counters_.find(tool)->second;
  return it->second->invoke(args);
}

std::uint64_t Environment::invocations(std::string_view tool) const {
  auto it = counters_.find(tool);
  return it == counters_.end() ? 0 : it->second;
}

void Environment::reset() {
  for (auto& [name, tool] : registry_) tool->reset();
  for (auto& [name, count] : counters_) count = 0;
}

std::unique_ptr<Environment> make_env(std::uint64_t seed, FlakyConfig flaky) {
  EnvConfig config;
  config.seed = seed;
  config.flaky = std::move(flaky);
  return std::make_unique<Environment>(std::move(config));
}

namespace {

enum class Op { Add, Sub, Mul, Div };

struct CalcError {
  std::string error_class;
  std::string message;
};

// Precedence-climbing evaluator over a byte cursor.
class CalcParser {
 public:
  explicit CalcParser(std::string_view text) : text_(text) {}

  double run() {
    double v = expression(0);
    skip_space();
    if (pos_ != text_.size()) throw error("unexpected character");
    return v;
  }

 private:
  static int precedence(Op op) { return (op == Op::Add || op == Op::Sub) ? 1 : 2; }

  CalcError error(const std::string& what) const {
    return {"parse", what + " at position " + std::to_string(pos_)};
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(std::string_view token) {
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  std::optional<Op> peek_operator() {
    skip_space();
    const std::size_t saved = pos_;
    std::optional<Op> op;
    if (consume("+")) op = Op::Add;
    else if (consume("-") || consume("−")) op = Op::Sub;
    else if (consume("*") || consume("×")) op = Op::Mul;
    else if (consume("/") || consume("÷")) op = Op::Div;
    pos_ = saved;
    return op;
  }

  void take_operator() {
    if (!(consume("+") || consume("-") || consume("−") || consume("*") ||
          consume("×") || consume("/") || consume("÷"))) {
      throw error("expected operator");
    }
  }

  double expression(int min_precedence) {
    double lhs = unary();
    while (true) {
      auto op = peek_operator();
      if (!op || precedence(*op) < min_precedence) break;
      take_operator();
      double rhs = expression(precedence(*op) + 1);
      lhs = apply(*op, lhs, rhs);
    }
    return lhs;
  }

  static double apply(Op op, double a, double b) {
    switch (op) {
      case Op::Add: return a + b;
      case Op::Sub: return a - b;
      case Op::Mul: return a * b;
      case Op::Div:
        if (b == 0.0) throw CalcError{"math", "division by zero"};
        return a / b;
    }
    return 0.0;
  }

  double unary() {
    skip_space();
    if (consume("-") || consume("−")) return -unary();
    if (consume("+")) return unary();
    return primary();
  }

  double primary() {
    skip_space();
    if (consume("(")) {
      double v = expression(0);
      skip_space();
      if (!consume(")")) throw error("expected ')'");
      return v;
    }
    const std::size_t start = pos_;
    bool digits = false;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
      digits = true;
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        digits = true;
      }
    }
    if (!digits) {
      pos_ = start;
      throw error("expected number");
    }
    return std::strtod(std::string(text_.substr(start, pos_ - start)).c_str(), nullptr);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

CalcOutcome calc_eval(std::string_view expr) {
  try {
    const double v = CalcParser(expr).run();
    return {true, format_number(v), "", ""};
  } catch (const CalcError& e) {
    return {false, "", e.error_class, e.message};
  }
}

}  // namespace workstate
