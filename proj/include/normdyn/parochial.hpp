#pragma once

// Closed-form analysis of two parochial populations playing a prisoner's
// dilemma with trembling-hand errors, and the gain from error-reducing A.I.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace normdyn::parochial {

enum class Move { C = 0, D = 1 };
enum class Order { Exact, FirstOrder };

// Row player's payoff, indexed [own][other] with C = 0, D = 1.
using PdMatrix = std::array<std::array<double, 2>, 2>;

// R = 2, S = 0, T = 3, P = 1.
inline constexpr PdMatrix kDefaultPd{{{2.0, 0.0}, {3.0, 1.0}}};

inline bool is_prisoners_dilemma(const PdMatrix& pd) {
  const double r = pd[0][0], s = pd[0][1], t = pd[1][0], p = pd[1][1];
  return t > r && r > p && p > s;
}

struct ParochialParams {
  double b = 0.5;   // share of population 1
  double n1 = 0.0;  // error rate of population 1
  double n2 = 0.0;  // error rate of population 2
  double c = 0.0;   // fraction of errors removed by A.I.
  PdMatrix pd = kDefaultPd;

  void validate() const {
    if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("b must lie in [0,1]");
    if (!(n1 >= 0.0 && n1 < 1.0)) throw std::invalid_argument("n1 must lie in [0,1)");
    if (!(n2 >= 0.0 && n2 < 1.0)) throw std::invalid_argument("n2 must lie in [0,1)");
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("c must lie in [0,1]");
    if (pd != kDefaultPd && !is_prisoners_dilemma(pd)) {
      throw std::invalid_argument("pd must satisfy T > R > P > S");
    }
  }
};

struct PayoffPair {
  double u1 = 0.0;
  double u2 = 0.0;
};

namespace detail {

// Probability vector over (C, D) actually played when intending `a` with
// error rate x, written as base + x * slope.
struct Intent {
  std::array<double, 2> base;
  std::array<double, 2> slope;
};

constexpr Intent intent(Move a) {
  return a == Move::C ? Intent{{1.0, 0.0}, {-1.0, 1.0}} : Intent{{0.0, 1.0}, {1.0, -1.0}};
}

inline double form(const std::array<double, 2>& l, const PdMatrix& pd, const std::array<double, 2>& r) {
  double s = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) s += l[i] * pd[i][j] * r[j];
  }
  return s;
}

// Expected payoff of someone intending `own` with error x against someone
// intending `other` with error y. The first-order variant drops the x*y term.
inline double expected(const PdMatrix& pd, Move own, double x, Move other, double y, Order order) {
  const Intent a = intent(own);
  const Intent o = intent(other);
  double v = form(a.base, pd, o.base) + x * form(a.slope, pd, o.base) + y * form(a.base, pd, o.slope);
  if (order == Order::Exact) v += x * y * form(a.slope, pd, o.slope);
  return v;
}

}  // namespace detail

// Population-level payoffs: in-group play is mutual cooperation with the
// group's own error rate, weighted by the group's share; out-group play uses
// the chosen moves.
inline PayoffPair expected_payoffs(const ParochialParams& p, Move a1, Move a2, Order order = Order::Exact) {
  using detail::expected;
  PayoffPair out;
  out.u1 = p.b * expected(p.pd, Move::C, p.n1, Move::C, p.n1, order) +
           (1.0 - p.b) * expected(p.pd, a1, p.n1, a2, p.n2, order);
  out.u2 = (1.0 - p.b) * expected(p.pd, Move::C, p.n2, Move::C, p.n2, order) +
           p.b * expected(p.pd, a2, p.n2, a1, p.n1, order);
  return out;
}

// U1 - U2 for every pair of out-group moves, as closed-form polynomials in
// (b, n1, n2); indexed [a1][a2].
using DifferenceMatrix = std::array<std::array<double, 2>, 2>;

inline DifferenceMatrix payoff_difference_matrix(double b, double n1, double n2) {
  DifferenceMatrix d{};
  d[0][0] = n1 - n2;
  d[0][1] = -2.0 * b * n2 + b + n1 + 3.0 * n2 - 2.0;
  d[1][0] = -2.0 * b * n1 + b - n1 - n2 + 1.0;
  d[1][1] = -2.0 * b * n1 - 2.0 * b * n2 + 2.0 * b - n1 + 3.0 * n2 - 1.0;
  return d;
}

// Largest absolute gap between the closed form and the first-order model
// built on `pd`.
inline double difference_matrix_residual(double b, double n1, double n2, const PdMatrix& pd = kDefaultPd) {
  const DifferenceMatrix closed = payoff_difference_matrix(b, n1, n2);
  ParochialParams p{b, n1, n2, 0.0, pd};
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const auto u = expected_payoffs(p, static_cast<Move>(i), static_cast<Move>(j), Order::FirstOrder);
      worst = std::max(worst, std::abs((u.u1 - u.u2) - closed[i][j]));
    }
  }
  return worst;
}

struct DefectDefectCertificate {
  bool is_nash = false;
  double margin_p1 = 0.0;  // U1(D,D) - U1(C,D)
  double margin_p2 = 0.0;  // U2(D,D) - U2(D,C)
};

inline DefectDefectCertificate is_dd_nash(double b, double n1, double n2, const PdMatrix& pd = kDefaultPd,
                                          Order order = Order::Exact) {
  const ParochialParams p{b, n1, n2, 0.0, pd};
  const auto dd = expected_payoffs(p, Move::D, Move::D, order);
  const auto cd = expected_payoffs(p, Move::C, Move::D, order);
  const auto dc = expected_payoffs(p, Move::D, Move::C, order);
  DefectDefectCertificate cert;
  cert.margin_p1 = dd.u1 - cd.u1;
  cert.margin_p2 = dd.u2 - dc.u2;
  cert.is_nash = cert.margin_p1 >= 0.0 && cert.margin_p2 >= 0.0;
  return cert;
}

struct Advantage {
  double term_p1 = 0.0;     // c * n1 * (2b + 1)
  double term_p2 = 0.0;     // c * n2 * (3 - 2b)
  double difference = 0.0;  // term_p1 - term_p2
  double delta_u1 = 0.0;    // first-order D-D payoff gain of population 1
  double delta_u2 = 0.0;    // same for population 2
};

// Effect of cutting both error rates by the factor (1 - c) at the D-D
// equilibrium. delta_u1 - delta_u2 equals `difference` in the first-order
// model with the default matrix.
inline Advantage ai_advantage(double b, double n1, double n2, double c, const PdMatrix& pd = kDefaultPd) {
  Advantage a;
  a.term_p1 = c * n1 * (2.0 * b + 1.0);
  a.term_p2 = c * n2 * (3.0 - 2.0 * b);
  a.difference = a.term_p1 - a.term_p2;
  const ParochialParams before{b, n1, n2, 0.0, pd};
  const ParochialParams after{b, (1.0 - c) * n1, (1.0 - c) * n2, c, pd};
  const auto u0 = expected_payoffs(before, Move::D, Move::D, Order::FirstOrder);
  const auto u1 = expected_payoffs(after, Move::D, Move::D, Order::FirstOrder);
  a.delta_u1 = u1.u1 - u0.u1;
  a.delta_u2 = u1.u2 - u0.u2;
  return a;
}

struct CurvePoint {
  double b = 0.0;
  double c = 0.0;
  double gain_p1 = 0.0;
  double gain_p2 = 0.0;
  double difference = 0.0;
};

// For a shared base error n, the per-population advantage terms over a
// (b, c) grid.
inline std::vector<CurvePoint> fig5_curves(const std::vector<double>& b_values, double n,
                                           const std::vector<double>& c_grid) {
  std::vector<CurvePoint> out;
  out.reserve(b_values.size() * c_grid.size());
  for (double b : b_values) {
    for (double c : c_grid) {
      ParochialParams{b, n, n, c}.validate();
      const Advantage a = ai_advantage(b, n, n, c);
      out.push_back({b, c, a.term_p1, a.term_p2, a.difference});
    }
  }
  return out;
}

}  // namespace normdyn::parochial
