#pragma once

#include <map>
#include <string>
#include <string_view>

#include "p2pq/model.hpp"

namespace p2pq {

/// Flat "key = value" configuration. Blank lines and lines starting with '#'
/// are ignored; keys are unique (a repeated key is an InvalidConfig error).
using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues parse_key_values(std::string_view text);
KeyValues load_key_values(const std::string& path);
std::string render_key_values(const KeyValues& kv);

/// Shortest decimal literal that parses back to exactly `value`.
std::string format_decimal(double value);
/// Strict decimal parse of the whole string; throws InvalidConfig naming `key`.
double parse_decimal(std::string_view key, std::string_view text);

/// Reads lambda_c, mu_c, lambda_s, mu_s. Missing or malformed keys throw
/// InvalidConfig; invalid rates throw InvalidParams.
ModelParams params_from_key_values(const KeyValues& kv);
KeyValues params_to_key_values(const ModelParams& params);

}  // namespace p2pq
