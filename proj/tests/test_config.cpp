#include <gtest/gtest.h>

#include <string>

#include "normdyn/config.hpp"

using namespace normdyn;

namespace {

ExperimentConfig from_text(const std::string& text, const std::vector<std::string>& overrides = {}) {
  std::vector<Assignment> over;
  for (std::size_t i = 0; i < overrides.size(); ++i) over.push_back(parse_override(overrides[i], i));
  return resolve_config(parse_assignments(text, "test.cfg"), over);
}

std::string error_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    from_text(text, overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
  const auto c = from_text("");
  EXPECT_EQ(c.world.n, 500u);
  EXPECT_EQ(c.world.game.m, 4u);
  EXPECT_EQ(c.world.game.alpha, 1.2);
  EXPECT_EQ(c.world.beta, 0.1);
  EXPECT_EQ(c.world.mu, 0.0005);
  EXPECT_EQ(c.world.price, 37.0);
  EXPECT_EQ(c.world.policy.q_h_min, 0.0);
  EXPECT_EQ(c.world.policy.q_h_max, 5.0);
  EXPECT_EQ(c.runs, 20u);
  EXPECT_EQ(c.preset, "custom");
}

TEST(Config, ValuesCommentsAndOverrides) {
  const auto c = from_text("# comment\n\nworld.alpha = 1.0\nworld.price = free\nexperiment.runs=3\n",
                           {"experiment.runs=5", "world.kinds = human, selfish"});
  EXPECT_EQ(c.world.game.alpha, 1.0);
  EXPECT_EQ(c.world.price, kFreePrice);
  EXPECT_EQ(c.runs, 5u);
  EXPECT_EQ(c.world.enabled_kinds, (std::vector<AgentKind>{AgentKind::Human, AgentKind::Selfish}));
}

TEST(Config, InvariantViolationNamesKeyAndLine) {
  const std::string e = error_of("world.n = 100\nworld.mu = 1.5\n");
  EXPECT_NE(e.find("mu must lie in [0,1]"), std::string::npos) << e;
  EXPECT_NE(e.find("test.cfg:2"), std::string::npos) << e;
  EXPECT_NE(e.find("world.mu"), std::string::npos) << e;
}

TEST(Config, UnknownKeyAndTypeMismatch) {
  EXPECT_NE(error_of("world.colour = red\n").find("unknown key 'world.colour'"), std::string::npos);
  const std::string e = error_of("\n\nworld.n = many\n");
  EXPECT_NE(e.find("test.cfg:3"), std::string::npos) << e;
  EXPECT_NE(e.find("non-negative integer"), std::string::npos) << e;
  EXPECT_NE(error_of("", {"world.self_play=maybe"}).find("--set #1"), std::string::npos);
  EXPECT_NE(error_of("world.alpha\n").find("expected 'key = value'"), std::string::npos);
}

TEST(Config, CrossFieldValidation) {
  EXPECT_NE(error_of("world.composition = human:10\n").find("sum to n"), std::string::npos);
  EXPECT_NE(error_of("world.q_h_max = 12\n").find("q_h range"), std::string::npos);
  EXPECT_NE(error_of("world.n = 10\ngradient.k_grid = 0,5,20\n").find("k_grid"), std::string::npos);
}

TEST(Config, PresetDefaultsYieldToUserValues) {
  auto c = resolve_config({}, {}, std::string("fig4"));
  EXPECT_EQ(c.world.price, kFreePrice);
  EXPECT_EQ(c.world.iterations, 30000u);
  c = resolve_config(parse_assignments("world.iterations = 10\n", "x"), {}, std::string("fig4"));
  EXPECT_EQ(c.world.iterations, 10u);
  EXPECT_EQ(c.preset, "fig4");
  EXPECT_THROW(resolve_config({}, {}, std::string("fig9")), ConfigError);
}

TEST(Config, EchoRoundTrips) {
  const auto c = from_text(
      "world.alpha = 1.0\nworld.price = free\nworld.composition = human:400,selfish:100\n"
      "world.kinds = human,selfish\nworld.counterfactual_q = 7.5\ngradient.k_grid = 0,250,500\n"
      "parochial.pd = 3,0,5,1\n");
  std::string text;
  for (const auto& line : config_lines(c)) text += line + "\n";
  const auto again = from_text(text);
  EXPECT_EQ(config_lines(again), config_lines(c));
  EXPECT_EQ(again.world.composition(), c.world.composition());
  EXPECT_EQ(*again.world.policy.counterfactual_q, 7.5);
}
