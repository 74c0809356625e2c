#include <gtest/gtest.h>

#include <cmath>

#include "normdyn/parochial.hpp"
#include "normdyn/random.hpp"

using namespace normdyn;
using namespace normdyn::parochial;

namespace {

// Independent oracle: enumerate the four realized move pairs with their
// probabilities and average the row payoffs.
double mixed_payoff(const PdMatrix& pd, Move own, double x, Move other, double y) {
  const double p_own_c = own == Move::C ? 1.0 - x : x;
  const double p_oth_c = other == Move::C ? 1.0 - y : y;
  const double po[2] = {p_own_c, 1.0 - p_own_c};
  const double pt[2] = {p_oth_c, 1.0 - p_oth_c};
  double v = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) v += po[i] * pt[j] * pd[i][j];
  }
  return v;
}

PayoffPair exact_oracle(const ParochialParams& p, Move a1, Move a2) {
  return {p.b * mixed_payoff(p.pd, Move::C, p.n1, Move::C, p.n1) + (1 - p.b) * mixed_payoff(p.pd, a1, p.n1, a2, p.n2),
          (1 - p.b) * mixed_payoff(p.pd, Move::C, p.n2, Move::C, p.n2) + p.b * mixed_payoff(p.pd, a2, p.n2, a1, p.n1)};
}

}  // namespace

TEST(ExpectedPayoffs, NoiselessValues) {
  const ParochialParams p{0.5, 0.0, 0.0, 0.0};
  const auto cc = expected_payoffs(p, Move::C, Move::C);
  EXPECT_DOUBLE_EQ(cc.u1, 2.0);
  EXPECT_DOUBLE_EQ(cc.u2, 2.0);
  const auto dd = expected_payoffs(p, Move::D, Move::D);
  EXPECT_DOUBLE_EQ(dd.u1, 1.5);
  EXPECT_DOUBLE_EQ(dd.u2, 1.5);
}

TEST(ExpectedPayoffs, ExactMatchesEnumerationOracle) {
  Engine gen(1);
  for (int rep = 0; rep < 1000; ++rep) {
    const ParochialParams p{uniform01(gen), uniform(gen, 0, 0.99), uniform(gen, 0, 0.99), 0.0};
    for (int a1 = 0; a1 < 2; ++a1) {
      for (int a2 = 0; a2 < 2; ++a2) {
        const auto u = expected_payoffs(p, Move(a1), Move(a2), Order::Exact);
        const auto o = exact_oracle(p, Move(a1), Move(a2));
        ASSERT_NEAR(u.u1, o.u1, 1e-12);
        ASSERT_NEAR(u.u2, o.u2, 1e-12);
      }
    }
  }
}

TEST(ExpectedPayoffs, RelabelingSymmetry) {
  Engine gen(2);
  for (int rep = 0; rep < 500; ++rep) {
    const ParochialParams p{uniform01(gen), uniform(gen, 0, 0.5), uniform(gen, 0, 0.5), 0.0};
    const ParochialParams q{1.0 - p.b, p.n2, p.n1, 0.0};
    for (int a1 = 0; a1 < 2; ++a1) {
      for (int a2 = 0; a2 < 2; ++a2) {
        for (auto order : {Order::Exact, Order::FirstOrder}) {
          const auto u = expected_payoffs(p, Move(a1), Move(a2), order);
          const auto v = expected_payoffs(q, Move(a2), Move(a1), order);
          ASSERT_NEAR(u.u1, v.u2, 1e-12);
          ASSERT_NEAR(u.u2, v.u1, 1e-12);
        }
      }
    }
  }
}

TEST(ExpectedPayoffs, FirstOrderCloseToExact) {
  // R - S - T + P vanishes for the default matrix, so the orders coincide
  // there; the alternative matrix exercises the quadratic term.
  const PdMatrix alt{{{3.0, -1.0}, {4.0, 0.5}}};
  Engine gen(3);
  for (int rep = 0; rep < 1000; ++rep) {
    const ParochialParams p{uniform01(gen), uniform(gen, 0, 0.3), uniform(gen, 0, 0.3), 0.0,
                            rep % 2 ? kDefaultPd : alt};
    const double bound = 4.0 * (p.n1 * p.n2 + p.n1 * p.n1 + p.n2 * p.n2);
    for (int a1 = 0; a1 < 2; ++a1) {
      for (int a2 = 0; a2 < 2; ++a2) {
        const auto e = expected_payoffs(p, Move(a1), Move(a2), Order::Exact);
        const auto f = expected_payoffs(p, Move(a1), Move(a2), Order::FirstOrder);
        ASSERT_LE(std::abs(e.u1 - f.u1), bound + 1e-15);
        ASSERT_LE(std::abs(e.u2 - f.u2), bound + 1e-15);
      }
    }
  }
}

TEST(ExpectedPayoffs, InGroupCooperationIsBest) {
  Engine gen(4);
  const PdMatrix alt{{{3.0, -1.0}, {4.0, 0.5}}};
  for (int rep = 0; rep < 1000; ++rep) {
    const double x = uniform(gen, 0.0, 0.49);
    for (const auto& pd : {kDefaultPd, alt}) {
      ASSERT_TRUE(is_prisoners_dilemma(pd));
      const double coop = detail::expected(pd, Move::C, x, Move::C, x, Order::Exact);
      const double defect = detail::expected(pd, Move::D, x, Move::D, x, Order::Exact);
      ASSERT_LE(defect, coop);
    }
  }
}

TEST(DifferenceMatrix, PrintedPolynomialValues) {
  EXPECT_NEAR(payoff_difference_matrix(0.5, 0.1, 0.2)[1][1], 0.2, 1e-15);
  EXPECT_EQ(payoff_difference_matrix(0.3, 0.25, 0.25)[0][0], 0.0);
}

TEST(DifferenceMatrix, EqualsFirstOrderModelOnGrid) {
  Engine gen(5);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    worst = std::max(worst, difference_matrix_residual(uniform01(gen), uniform(gen, 0, 0.99), uniform(gen, 0, 0.99)));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(DefectDefect, NashBelowHalfErrorRate) {
  EXPECT_TRUE(is_dd_nash(0.5, 0.2, 0.2).is_nash);
  Engine gen(6);
  for (int rep = 0; rep < 1000; ++rep) {
    const double b = uniform01(gen);
    EXPECT_TRUE(is_dd_nash(b, 0.0, 0.0).is_nash);
    const auto cert = is_dd_nash(b, uniform(gen, 0, 0.4999), uniform(gen, 0, 0.4999));
    ASSERT_TRUE(cert.is_nash);
    ASSERT_GE(cert.margin_p1, 0.0);
    ASSERT_GE(cert.margin_p2, 0.0);
  }
}

TEST(DefectDefect, FailingMarginAboveHalf) {
  const auto cert = is_dd_nash(0.5, 0.6, 0.2);
  EXPECT_FALSE(cert.is_nash);
  // (1 - b)(1 - 2 n1) = 0.5 * (1 - 1.2) = -0.1
  EXPECT_NEAR(cert.margin_p1, -0.1, 1e-12);
  EXPECT_GT(cert.margin_p2, 0.0);
}

TEST(Advantage, ClosedFormIdentity) {
  EXPECT_NEAR(ai_advantage(1.0, 0.3, 0.3, 0.5).difference, 0.3, 1e-15);
  Engine gen(7);
  for (int rep = 0; rep < 1000; ++rep) {
    const double b = uniform01(gen), n1 = uniform(gen, 0, 0.5), n2 = uniform(gen, 0, 0.5), c = uniform01(gen);
    const auto a = ai_advantage(b, n1, n2, c);
    ASSERT_NEAR(a.delta_u1 - a.delta_u2, a.difference, 1e-12);
    ASSERT_NEAR(a.delta_u1, c * n1 - 2 * (1 - b) * c * n2, 1e-12);
    ASSERT_NEAR(a.delta_u2, c * n2 - 2 * b * c * n1, 1e-12);
    const double n = n1;
    ASSERT_NEAR(ai_advantage(b, n, n, c).difference, (4 * b - 2) * n * c, 1e-12);
    ASSERT_NEAR(ai_advantage(0.5, n, n, c).difference, 0.0, 1e-15);
  }
}

TEST(Advantage, NoReductionNoAdvantage) {
  const auto a = ai_advantage(0.7, 0.2, 0.1, 0.0);
  EXPECT_EQ(a.term_p1, 0.0);
  EXPECT_EQ(a.term_p2, 0.0);
  EXPECT_EQ(a.difference, 0.0);
  EXPECT_EQ(a.delta_u1, 0.0);
  EXPECT_EQ(a.delta_u2, 0.0);
}

TEST(Curves, ShapeAndLinearity) {
  const std::vector<double> cs{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto pts = fig5_curves({0.5, 0.75, 1.0}, 0.2, cs);
  ASSERT_EQ(pts.size(), 15u);
  for (const auto& p : pts) {
    if (p.b == 0.5) {
      EXPECT_NEAR(p.difference, 0.0, 1e-15);
    }
    if (p.c == 0.0) {
      EXPECT_EQ(p.gain_p1, 0.0);
      EXPECT_EQ(p.gain_p2, 0.0);
    }
  }
  for (std::size_t i = 0; i < cs.size(); ++i) {
    EXPECT_NEAR(pts[10 + i].difference, 2.0 * pts[5 + i].difference, 1e-15);
    if (i > 0) {
      EXPECT_GT(pts[10 + i].gain_p1, pts[10 + i - 1].gain_p1);
      EXPECT_GT(pts[10 + i].difference, pts[10 + i - 1].difference);
    }
  }
  EXPECT_THROW(fig5_curves({1.5}, 0.2, cs), std::invalid_argument);
}
