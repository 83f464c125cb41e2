#pragma once
// Canonical text dialect shared by ledger lines, task files, rule files and
// environment configs: UTF-8 JSON, object keys sorted by byte order, no
// insignificant whitespace, integers without a fraction, other numbers in
// shortest round-trip form.

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

namespace workstate {

using Value = nlohmann::json;

std::string canonical_dump(const Value& value);

// Throws std::invalid_argument on malformed input.
Value parse_canonical(std::string_view text);

// Lowercase hex SHA-256 digest of `bytes`.
std::string sha256_hex(std::string_view bytes);

bool is_lower_hex(std::string_view text, std::size_t length);

// "YYYY-MM-DDTHH:MM:SS.mmmZ" for milliseconds since the Unix epoch.
std::string format_timestamp(std::int64_t epoch_ms);

// Shortest round-trip decimal form; integral values print without a fraction
// and negative zero prints as "0".
std::string format_number(double value);

}  // namespace workstate
