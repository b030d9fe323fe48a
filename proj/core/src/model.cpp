#include "p2pq/model.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "p2pq/errors.hpp"

namespace p2pq {

namespace {

void require_rate(const char* name, double value) {
  if (!(std::isfinite(value) && value > 0.0)) {
    std::ostringstream os;
    os << name << " must be strictly positive and finite, got " << value;
    throw InvalidParams(os.str());
  }
}

}  // namespace

ModelParams::ModelParams(double lambda_c, double mu_c, double lambda_s, double mu_s)
    : lambda_c_(lambda_c), mu_c_(mu_c), lambda_s_(lambda_s), mu_s_(mu_s) {
  require_rate("lambda_c", lambda_c);
  require_rate("mu_c", mu_c);
  require_rate("lambda_s", lambda_s);
  require_rate("mu_s", mu_s);
}

ModelParams ModelParams::from_loads(double rho_c, double mu_c, double rho_s, double mu_s) {
  return ModelParams(rho_c * mu_c, mu_c, rho_s * mu_s, mu_s);
}

Loads loads(const ModelParams& params) noexcept {
  return {params.rho_c(), params.rho_s()};
}

bool is_stable_predicate(const ModelParams& params) noexcept {
  return params.rho_c() < params.rho_s();
}

NotationTags parse_notation(std::string_view text) {
  const std::string owned(text);
  std::size_t pos = 0;
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  std::size_t end = text.size();
  while (end > pos && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;

  auto fail = [&](std::size_t at, const std::string& what) -> void {
    throw MalformedNotation(owned, at, what);
  };
  auto tag = [&]() -> ProcessTag {
    if (pos >= end) fail(pos, "expected one of M, D, G but input ended");
    switch (text[pos]) {
      case 'M': ++pos; return ProcessTag::M;
      case 'D': ++pos; return ProcessTag::D;
      case 'G': ++pos; return ProcessTag::G;
      default: break;
    }
    fail(pos, std::string("unknown symbol '") + text[pos] + "', expected one of M, D, G");
    return ProcessTag::M;  // unreachable
  };
  auto expect = [&](char c) {
    if (pos >= end) fail(pos, std::string("expected '") + c + "' but input ended");
    if (text[pos] != c) {
      fail(pos, std::string("expected '") + c + "', found '" + text[pos] + "'");
    }
    ++pos;
  };

  NotationTags tags;
  tags.job_arrival = tag();
  expect('/');
  tags.workload = tag();
  expect('/');
  expect('(');
  tags.server_arrival = tag();
  expect('/');
  tags.server_lifetime = tag();
  expect(')');
  if (pos != end) fail(pos, "trailing characters after ')'");
  return tags;
}

std::string render_notation(const NotationTags& tags) {
  std::string out;
  out += static_cast<char>(tags.job_arrival);
  out += '/';
  out += static_cast<char>(tags.workload);
  out += "/(";
  out += static_cast<char>(tags.server_arrival);
  out += '/';
  out += static_cast<char>(tags.server_lifetime);
  out += ')';
  return out;
}

}  // namespace p2pq
