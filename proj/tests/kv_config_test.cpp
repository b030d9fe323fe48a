#include <gtest/gtest.h>

#include <random>

#include "p2pq/errors.hpp"
#include "p2pq/kv_config.hpp"

using namespace p2pq;

TEST(KeyValues, ParsesCommentsAndWhitespace) {
  const auto kv = parse_key_values("# header\n lambda_c = 5 \n\n# note\nmu_c=10\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv.at("lambda_c"), "5");
  EXPECT_EQ(kv.at("mu_c"), "10");
}

TEST(KeyValues, RejectsDuplicatesAndJunk) {
  EXPECT_THROW(parse_key_values("a=1\na=2\n"), InvalidConfig);
  EXPECT_THROW(parse_key_values("no equals sign\n"), InvalidConfig);
  EXPECT_THROW(parse_key_values("=3\n"), InvalidConfig);
}

TEST(KeyValues, StrictDecimals) {
  EXPECT_DOUBLE_EQ(parse_decimal("x", "2.5e-3"), 2.5e-3);
  EXPECT_THROW(parse_decimal("x", "2.5abc"), InvalidConfig);
  EXPECT_THROW(parse_decimal("x", ""), InvalidConfig);
}

TEST(KeyValues, ParamsRoundTripBitExact) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> rate(1e-3, 1e3);
  for (int i = 0; i < 100; ++i) {
    const ModelParams p(rate(gen), rate(gen), rate(gen), rate(gen));
    const auto text = render_key_values(params_to_key_values(p));
    EXPECT_EQ(params_from_key_values(parse_key_values(text)), p) << text;
  }
}

TEST(KeyValues, MissingParamIsInvalidConfig) {
  EXPECT_THROW(params_from_key_values(parse_key_values("lambda_c=1\nmu_c=1\nmu_s=1\n")),
               InvalidConfig);
}

TEST(KeyValues, InvalidParamValueIsInvalidInput) {
  EXPECT_THROW(
      params_from_key_values(parse_key_values("lambda_c=0\nmu_c=1\nlambda_s=1\nmu_s=1\n")),
      InvalidInput);
}
