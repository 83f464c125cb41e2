#include "doctest.h"
#include "support/sha256_ref.hpp"
#include "workstate/canonical.hpp"

#include <random>

using namespace workstate;

TEST_CASE("sha256 matches the FIPS test vector and the reference implementation") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

  std::mt19937 rng(7);
  for (int len = 0; len < 200; ++len) {
    std::string s;
    for (int i = 0; i < len; ++i) s.push_back(static_cast<char>(rng() & 0xff));
    CHECK(sha256_hex(s) == testing::sha256_reference(s));
  }
}

TEST_CASE("canonical dump sorts keys and drops whitespace") {
  const Value v = parse_canonical(R"({ "b": [1, 2.5, true], "a": {"z": null, "y": "x"} })");
  CHECK(canonical_dump(v) == R"({"a":{"y":"x","z":null},"b":[1,2.5,true]})");
  CHECK(canonical_dump(parse_canonical(canonical_dump(v))) == canonical_dump(v));
  CHECK_THROWS_AS(parse_canonical("{\"a\":"), std::invalid_argument);
}

TEST_CASE("timestamps are ISO-8601 UTC with milliseconds") {
  CHECK(format_timestamp(0) == "1970-01-01T00:00:00.000Z");
  CHECK(format_timestamp(7) == "1970-01-01T00:00:00.007Z");
  CHECK(format_timestamp(1700000000123) == "2023-11-14T22:13:20.123Z");
}

TEST_CASE("numbers format without trailing zeros") {
  CHECK(format_number(5.0) == "5");
  CHECK(format_number(2.5) == "2.5");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(-3.25) == "-3.25");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
}

TEST_CASE("lowercase hex check") {
  CHECK(is_lower_hex(std::string(64, 'a'), 64));
  CHECK_FALSE(is_lower_hex(std::string(64, 'A'), 64));
  CHECK_FALSE(is_lower_hex(std::string(63, '0'), 64));
  CHECK_FALSE(is_lower_hex("g", 1));
}
