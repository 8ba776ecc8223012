#pragma once

#include <string>

#include "json.hpp"

namespace stablemil {

using Json = nlohmann::ordered_json;

/// Formats a double with 17 significant digits ("%.17g"), which round-trips
/// every finite binary64 value.
std::string format_double(double value);

/// Compact JSON with insertion-ordered keys and 17-digit floats. This is the
/// single serialization path for datasets, models and pools.
std::string to_canonical(const Json& value);

/// Parses text, throwing Error(kParseError) with `context` on failure.
Json parse_json(const std::string& text, const std::string& context);

}  // namespace stablemil
