#include <gtest/gtest.h>

#include <cmath>

#include "normdyn/metrics.hpp"

using namespace normdyn;

namespace {

WorldParams small_world(std::size_t n) {
  WorldParams p;
  p.n = n;
  p.iterations = 0;
  return p;
}

GradientEstimate point(std::size_t k, std::size_t n, double g) {
  GradientEstimate e;
  e.k = k;
  e.n = n;
  e.g = g;
  return e;
}

}  // namespace

TEST(TransitionRates, BoundariesVanish) {
  Engine gen(1);
  const WorldParams p = small_world(30);
  for (std::size_t k : {0u, 30u}) {
    const auto e = imitation_gradient(k, AgentKind::Selfish, p, 3, gen);
    EXPECT_EQ(e.t_plus, 0.0);
    EXPECT_EQ(e.t_minus, 0.0);
    EXPECT_EQ(e.g, 0.0);
  }
}

TEST(TransitionRates, ClosedForm) {
  GradientEstimate e;
  e.k = 25;
  e.n = 100;
  e.f_h_mean = 50.0;
  e.f_ai_mean = 60.0;
  apply_transition_rates(e, 0.1, 37.0);
  const double mix = 0.75 * 0.25;
  const double up = 1.0 / (1.0 + std::exp(-1.0));
  EXPECT_NEAR(e.t_plus, mix * up, 1e-15);
  EXPECT_NEAR(e.t_minus, mix * (1.0 - up), 1e-15);
  EXPECT_DOUBLE_EQ(e.g, e.t_plus - e.t_minus);
}

TEST(TransitionRates, PriceGateForcesNonPositiveG) {
  Engine gen(2);
  for (int rep = 0; rep < 1000; ++rep) {
    GradientEstimate e;
    e.n = 100;
    e.k = 1 + uniform_index(gen, 99);
    e.f_h_mean = uniform(gen, -100.0, 36.99);
    e.f_ai_mean = uniform(gen, -100.0, 500.0);
    apply_transition_rates(e, 0.1, 37.0);
    ASSERT_EQ(e.t_plus, 0.0);
    ASSERT_LE(e.g, 0.0);
  }
}

TEST(Gradient, DeterministicGivenSeed) {
  const WorldParams p = small_world(40);
  Engine a(3), b(3);
  const auto ea = imitation_gradient(10, AgentKind::HConscious, p, 4, a);
  const auto eb = imitation_gradient(10, AgentKind::HConscious, p, 4, b);
  EXPECT_EQ(ea.f_h_mean, eb.f_h_mean);
  EXPECT_EQ(ea.f_ai_mean, eb.f_ai_mean);
  EXPECT_EQ(ea.g, eb.g);
}

TEST(Gradient, RejectsBadArguments) {
  Engine gen(4);
  const WorldParams p = small_world(10);
  EXPECT_THROW(imitation_gradient(3, AgentKind::Human, p, 1, gen), std::invalid_argument);
  EXPECT_THROW(imitation_gradient(11, AgentKind::Selfish, p, 1, gen), std::invalid_argument);
  EXPECT_THROW(imitation_gradient(3, AgentKind::Selfish, p, 0, gen), std::invalid_argument);
}

TEST(Gradient, StaticWorldLayout) {
  Engine gen(5);
  const WorldParams p = small_world(20);
  const World w = make_static_world(6, AgentKind::HConscious, p, gen);
  for (std::size_t i = 0; i < 14; ++i) EXPECT_EQ(w.agents()[i].kind, AgentKind::Human);
  for (std::size_t i = 14; i < 20; ++i) {
    EXPECT_EQ(w.agents()[i].kind, AgentKind::HConscious);
    EXPECT_NE(w.agents()[i].ledger, HConsciousLedger{});  // warmed up
  }
}

TEST(Gradient, EndpointsOfCurveAreZero) {
  Engine gen(6);
  const WorldParams p = small_world(20);
  const auto c = gradient_curve(AgentKind::NashEQ, p, {0, 20}, 2, gen);
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[0].g, 0.0);
  EXPECT_EQ(c.points[1].g, 0.0);
  EXPECT_TRUE(c.crossings.empty());
}

TEST(Crossings, StableAndUnstableWithInterpolation) {
  const std::vector<GradientEstimate> pts{point(0, 100, 0.0),   point(10, 100, 0.02), point(20, 100, 0.01),
                                          point(30, 100, -0.03), point(40, 100, -0.01), point(50, 100, 0.01),
                                          point(100, 100, 0.0)};
  const auto z = find_zero_crossings(pts);
  ASSERT_EQ(z.size(), 2u);
  EXPECT_TRUE(z[0].stable);
  EXPECT_EQ(z[0].k_lo, 20u);
  EXPECT_EQ(z[0].k_hi, 30u);
  EXPECT_DOUBLE_EQ(z[0].k_star, 22.5);
  EXPECT_DOUBLE_EQ(z[0].frac_star, 0.225);
  EXPECT_FALSE(z[1].stable);
  EXPECT_DOUBLE_EQ(z[1].k_star, 45.0);
}

TEST(Crossings, AverageRecomputesFromMeans) {
  GradientCurve a, b;
  a.ai_kind = b.ai_kind = AgentKind::Selfish;
  for (auto* c : {&a, &b}) {
    GradientEstimate e;
    e.k = 50;
    e.n = 100;
    c->points.push_back(e);
  }
  a.points[0].f_h_mean = 40.0;
  a.points[0].f_ai_mean = 100.0;
  b.points[0].f_h_mean = 30.0;  // mean 35 < 37: gate closes
  b.points[0].f_ai_mean = 100.0;
  const auto m = average_curves({a, b}, 0.1, 37.0);
  EXPECT_DOUBLE_EQ(m.points[0].f_h_mean, 35.0);
  EXPECT_EQ(m.points[0].t_plus, 0.0);
  EXPECT_LT(m.points[0].g, 0.0);
}

TEST(Grid, EvenGrid) {
  EXPECT_EQ(even_grid(500, 4), (std::vector<std::size_t>{0, 125, 250, 375, 500}));
  EXPECT_EQ(even_grid(3, 6), (std::vector<std::size_t>{0, 1, 2, 3}));
}
