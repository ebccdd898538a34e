#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

namespace cvqkd {
namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

TEST(Config, ParsesRunAndAxes) {
  const auto cfg = parse(
      "# comment\n"
      "scenario = stations\n"
      "eve-fiber = g652   # trailing comment\n"
      "l-total = 100\n"
      "v-rho = 1.5\n"
      "detection = het\n"
      "direction = dr\n"
      "limit-ladder = 100, 1000\n"
      "\n"
      "[axis L1]\n"
      "min = 0\nmax = 100\nsteps = 11\n"
      "[axis G]\n"
      "min = 1\nmax = 30\nsteps = 5\nlog = true\n"
      "[run]\n"
      "gain = 2\n");
  ASSERT_TRUE(cfg.scenario.has_value());
  EXPECT_EQ(*cfg.scenario, Scenario::stations);
  EXPECT_EQ(cfg.params.eve_fiber.name, "g652");
  EXPECT_DOUBLE_EQ(cfg.params.l_total, 100.0);
  EXPECT_DOUBLE_EQ(*cfg.params.v_rho, 1.5);
  EXPECT_EQ(cfg.params.rate.detection, Detection::heterodyne);
  EXPECT_EQ(cfg.params.rate.direction, Direction::direct);
  EXPECT_EQ(cfg.params.limit.ladder, (std::vector<double>{100.0, 1000.0}));
  EXPECT_DOUBLE_EQ(cfg.params.gain, 2.0);
  ASSERT_EQ(cfg.axes.size(), 2u);
  EXPECT_EQ(cfg.axes[0].name, "L1");
  EXPECT_EQ(cfg.axes[0].steps, 11);
  EXPECT_TRUE(cfg.axes[1].log);
}

TEST(Config, LimitKeywordClearsSource) {
  RunConfig cfg;
  apply_setting(cfg, "v-rho", "3");
  apply_setting(cfg, "v-rho", "limit");
  EXPECT_FALSE(cfg.params.v_rho.has_value());
}

TEST(Config, RejectsUnknownKeys) {
  EXPECT_THROW(parse("colour = red\n"), ConfigError);
  EXPECT_THROW(parse("[axis L9]\n"), ConfigError);
  EXPECT_THROW(parse("[axis L1]\nwidth = 3\n"), ConfigError);
  EXPECT_THROW(parse("[misc]\n"), ConfigError);
}

TEST(Config, RejectsMalformedValues) {
  EXPECT_THROW(parse("epsilon = abc\n"), ConfigError);
  EXPECT_THROW(parse("epsilon = 0.1x\n"), ConfigError);
  EXPECT_THROW(parse("eve-fiber = copper\n"), ConfigError);
  EXPECT_THROW(parse("detection = both\n"), ConfigError);
  EXPECT_THROW(parse("just some words\n"), ConfigError);
  EXPECT_THROW(parse("[axis L1\n"), ConfigError);
  EXPECT_THROW(parse("[axis L1]\nlog = maybe\n"), ConfigError);
}

TEST(Config, ErrorsCarryLineNumbers) {
  try {
    parse("epsilon = 0.1\n\nbeta = nope\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Config, LaterSettingsOverrideEarlier) {
  auto cfg = parse("epsilon = 0.1\n");
  apply_setting(cfg, "epsilon", "0.05");
  EXPECT_DOUBLE_EQ(cfg.params.epsilon, 0.05);
}

TEST(Config, KeysAreAllAccepted) {
  const std::map<std::string, std::string> sample{
      {"scenario", "fig1b"}, {"attack", "teleport"}, {"epsilon", "0.04"}, {"va", "4"},
      {"beta", "0.96"}, {"alpha-system", "0.275"}, {"eve-fiber", "lowloss"}, {"l-total", "50"},
      {"l1", "0"}, {"l2", "10"}, {"gain", "1"}, {"v-rho", "limit"}, {"detection", "hom"},
      {"direction", "rr"}, {"out", "x.csv"}, {"tol", "1e-3"}, {"g-min", "1"}, {"g-max", "50"},
      {"limit-ladder", "100"}, {"limit-tol", "1e-4"}};
  for (const auto& key : config_keys()) {
    RunConfig cfg;
    ASSERT_TRUE(sample.count(key)) << key;
    EXPECT_NO_THROW(apply_setting(cfg, key, sample.at(key))) << key;
  }
}

}  // namespace
}  // namespace cvqkd
