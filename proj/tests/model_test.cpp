#include <gtest/gtest.h>

#include <random>

#include "p2pq/errors.hpp"
#include "p2pq/model.hpp"

using namespace p2pq;

TEST(Notation, ParsesPaperForms) {
  const auto mm = parse_notation("M/M/(M/M)");
  EXPECT_EQ(mm.job_arrival, ProcessTag::M);
  EXPECT_EQ(mm.workload, ProcessTag::M);
  EXPECT_EQ(mm.server_arrival, ProcessTag::M);
  EXPECT_EQ(mm.server_lifetime, ProcessTag::M);

  const auto mg = parse_notation("M/G/(M/M)");
  EXPECT_EQ(mg.workload, ProcessTag::G);
  EXPECT_EQ(render_notation(mg), "M/G/(M/M)");
}

TEST(Notation, MissingParenthesisReportsIndexFour) {
  try {
    parse_notation("M/M/M/M");
    FAIL() << "expected MalformedNotation";
  } catch (const MalformedNotation& e) {
    EXPECT_EQ(e.position(), 4u);
    EXPECT_EQ(e.text(), "M/M/M/M");
  }
}

TEST(Notation, WhitespaceAroundIsAllowed) {
  EXPECT_EQ(render_notation(parse_notation("  M/D/(M/G)\t")), "M/D/(M/G)");
}

TEST(Notation, ErrorPositionsCountFromOriginalText) {
  auto position = [](const char* text) {
    try {
      parse_notation(text);
    } catch (const MalformedNotation& e) {
      return static_cast<long>(e.position());
    }
    return -1L;
  };
  EXPECT_EQ(position("  M/M/M/M"), 6);
  EXPECT_EQ(position("X/M/(M/M)"), 0);
  EXPECT_EQ(position("M/M/(M/M"), 8);
  EXPECT_EQ(position("M/M/(M/M))"), 9);
  EXPECT_EQ(position("M/M/(M/Q)"), 7);
  EXPECT_EQ(position(""), 0);
}

TEST(Notation, AllEightyOneCombinationsRoundTrip) {
  int count = 0;
  for (auto a : kAllTags)
    for (auto b : kAllTags)
      for (auto c : kAllTags)
        for (auto e : kAllTags) {
          const NotationTags tags{a, b, c, e};
          const auto text = render_notation(tags);
          EXPECT_EQ(parse_notation(text), tags) << text;
          EXPECT_EQ(render_notation(parse_notation(text)), text);
          ++count;
        }
  EXPECT_EQ(count, 81);
}

TEST(Params, LoadsExamples) {
  const auto fig3 = loads(ModelParams(8, 1, 10, 1));
  EXPECT_DOUBLE_EQ(fig3.rho_c, 8);
  EXPECT_DOUBLE_EQ(fig3.rho_s, 10);
  const auto unit = loads(ModelParams(1, 1, 1, 1));
  EXPECT_DOUBLE_EQ(unit.rho_c, 1);
  EXPECT_DOUBLE_EQ(unit.rho_s, 1);
  const auto l = loads(ModelParams(50, 10, 10, 1));
  EXPECT_DOUBLE_EQ(l.rho_c, 5);
  EXPECT_DOUBLE_EQ(l.rho_s, 10);
}

TEST(Params, LoadsAreHomogeneousOfDegreeZero) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> rate(0.01, 100.0);
  for (int i = 0; i < 200; ++i) {
    const ModelParams p(rate(gen), rate(gen), rate(gen), rate(gen));
    const double c = rate(gen);
    const ModelParams q(c * p.lambda_c(), c * p.mu_c(), c * p.lambda_s(), c * p.mu_s());
    EXPECT_NEAR(loads(q).rho_c, loads(p).rho_c, 1e-12 * loads(p).rho_c);
    EXPECT_NEAR(loads(q).rho_s, loads(p).rho_s, 1e-12 * loads(p).rho_s);
  }
}

TEST(Params, StablePredicate) {
  EXPECT_TRUE(is_stable_predicate(ModelParams(8, 1, 10, 1)));
  EXPECT_FALSE(is_stable_predicate(ModelParams(10, 1, 10, 1)));
  EXPECT_FALSE(is_stable_predicate(ModelParams(12, 1, 10, 1)));
}

TEST(Params, RejectsNonPositiveOrNonFiniteRates) {
  EXPECT_THROW(ModelParams(0, 1, 1, 1), InvalidParams);
  EXPECT_THROW(ModelParams(1, -1, 1, 1), InvalidParams);
  EXPECT_THROW(ModelParams(1, 1, std::nan(""), 1), InvalidParams);
  EXPECT_THROW(ModelParams(1, 1, 1, INFINITY), InvalidParams);
  EXPECT_THROW(ModelParams(0, 1, 1, 1), InvalidInput);
}

TEST(Params, FromLoads) {
  const auto p = ModelParams::from_loads(5, 10, 10, 1);
  EXPECT_DOUBLE_EQ(p.lambda_c(), 50);
  EXPECT_DOUBLE_EQ(p.lambda_s(), 10);
  EXPECT_DOUBLE_EQ(p.rho_c(), 5);
}
