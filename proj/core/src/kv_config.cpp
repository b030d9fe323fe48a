#include "p2pq/kv_config.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "p2pq/errors.hpp"

namespace p2pq {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidConfig("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw InvalidConfig("config line " + std::to_string(line_no) + ": empty key");
    }
    if (!kv.emplace(std::string(key), std::string(value)).second) {
      throw InvalidConfig("config line " + std::to_string(line_no) + ": duplicate key '" +
                          std::string(key) + "'");
    }
  }
  return kv;
}

KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

std::string render_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string format_decimal(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

double parse_decimal(std::string_view key, std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw InvalidConfig("value for '" + std::string(key) + "' is not a decimal literal: '" +
                        std::string(text) + "'");
  }
  return value;
}

ModelParams params_from_key_values(const KeyValues& kv) {
  auto get = [&](std::string_view key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw InvalidConfig("missing key '" + std::string(key) + "'");
    return parse_decimal(key, it->second);
  };
  return ModelParams(get("lambda_c"), get("mu_c"), get("lambda_s"), get("mu_s"));
}

KeyValues params_to_key_values(const ModelParams& params) {
  return {
      {"lambda_c", format_decimal(params.lambda_c())},
      {"mu_c", format_decimal(params.mu_c())},
      {"lambda_s", format_decimal(params.lambda_s())},
      {"mu_s", format_decimal(params.mu_s())},
  };
}

}  // namespace p2pq
