#include "doctest.h"
#include "support/calc_oracle.hpp"
#include "workstate/simenv.hpp"

using namespace workstate;

TEST_CASE("calc examples") {
  CHECK(calc_eval("2+3").output == "5");
  CHECK(calc_eval("2*(3+4)").output == "14");
  CHECK(calc_eval("10/4").output == "2.5");
  CHECK(calc_eval("-3 - -2").output == "-1");
  CHECK(calc_eval("2 \xE2\x88\x92 5").output == "-3");
  CHECK(calc_eval("6 \xC3\x97 7 \xC3\xB7 2").output == "21");
  CHECK(calc_eval("8-3-2").output == "3");
  CHECK(calc_eval("1.5*2").output == "3");

  const auto div = calc_eval("1/0");
  CHECK_FALSE(div.ok);
  CHECK(div.error_class == "math");
  CHECK(calc_eval("(1+2)/(3-3)").error_class == "math");
  for (const char* bad : {"", "2+", "(1", "1)", "abc", "2**3", "1 2"}) {
    const auto r = calc_eval(bad);
    CHECK_FALSE(r.ok);
    CHECK(r.error_class == "parse");
  }
}

TEST_CASE("calc agrees with the oracle on a sample of expressions") {
  for (const char* e : {"1+2*3", "(1+2)*3", "7/2/2", "2-7*7", "((2))", "0/7", "7-2-1*0", "1/7*7"}) {
    const auto oracle = testing::CalcOracle::evaluate(e);
    const auto got = calc_eval(e);
    REQUIRE(got.ok);
    CHECK(got.output == format_number(oracle.value));
  }
}

TEST_CASE("calc and kvstore through the environment") {
  Environment env({});
  CHECK(env.invoke("calc", {{"expr", "2*(3+4)"}}) == ToolResult::success("14"));
  CHECK(env.invoke("calc", Value::object()).error_class == "bad_args");
  CHECK(env.invoke("kvstore", {{"op", "put"}, {"k", "a"}, {"v", "1"}}).ok);
  CHECK(env.invoke("kvstore", {{"op", "get"}, {"k", "a"}}) == ToolResult::success("1"));
  CHECK_FALSE(env.invoke("kvstore", {{"op", "get"}, {"k", "missing"}}).ok);
  CHECK(env.invoke("echo", {{"text", "hi"}}) == ToolResult::success("hi"));
  CHECK_THROWS_AS(env.invoke("teleport", Value::object()), std::out_of_range);
  CHECK(env.invocations("calc") == 2);
}

TEST_CASE("flaky follows its schedule and reset restarts it") {
  Environment env({7, {2, "transient"}, {}});
  const auto r1 = env.invoke("flaky", {{"text", "x"}});
  const auto r2 = env.invoke("flaky", {{"text", "x"}});
  const auto r3 = env.invoke("flaky", {{"text", "x"}});
  CHECK_FALSE(r1.ok);
  CHECK(r1.error_class == "transient");
  CHECK_FALSE(r2.ok);
  CHECK(r3.ok);
  CHECK(r3.output.rfind("x (nonce ", 0) == 0);

  env.reset();
  CHECK(env.invocations("flaky") == 0);
  CHECK_FALSE(env.invoke("flaky", {{"text", "x"}}).ok);
  env.invoke("flaky", {{"text", "x"}});
  CHECK(env.invoke("flaky", {{"text", "x"}}) == r3);

  Environment other({8, {2, "transient"}, {}});
  other.invoke("flaky", Value::object());
  other.invoke("flaky", Value::object());
  CHECK(other.invoke("flaky", {{"text", "x"}}).output != r3.output);
}

TEST_CASE("reset gives identical result sequences and is a no-op on a fresh env") {
  auto run = [](Environment& env) {
    std::vector<ToolResult> out;
    out.push_back(env.invoke("kvstore", {{"op", "get"}, {"k", "a"}}));
    out.push_back(env.invoke("kvstore", {{"op", "put"}, {"k", "a"}, {"v", "2"}}));
    for (int i = 0; i < 4; ++i) out.push_back(env.invoke("flaky", {{"text", "q"}}));
    out.push_back(env.invoke("kvstore", {{"op", "get"}, {"k", "a"}}));
    return out;
  };
  Environment env({3, {2, "timeout"}, {}});
  env.reset();
  const auto first = run(env);
  env.reset();
  CHECK(run(env) == first);
  CHECK(first[2].error_class == "timeout");
}

TEST_CASE("bad configuration") {
  CHECK_THROWS_AS(Environment({0, {-1, "transient"}, {}}), BadConfig);
  CHECK_THROWS_AS(env_config_from_value(parse_canonical(R"({"seed":1,"flaky":{"fail_count":-2}})")), BadConfig);
  const EnvConfig c = env_config_from_value(parse_canonical(R"({"seed":9,"flaky":{"fail_count":3}})"));
  CHECK(c.seed == 9);
  CHECK(c.flaky.fail_count == 3);
  CHECK(c.flaky.error_class == "transient");
  CHECK(env_config_to_value(c) == parse_canonical(R"({"seed":9,"flaky":{"fail_count":3,"error_class":"transient"}})"));
}
