#pragma once

// Stochastic bimatrix games: generation, noisy observation and the pure
// Nash machinery used by humans and NashEQ agents.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "normdyn/random.hpp"

namespace normdyn {

inline constexpr std::size_t kMaxActions = 16;

enum class Seat { One, Two };

constexpr Seat other(Seat s) { return s == Seat::One ? Seat::Two : Seat::One; }

struct PayoffPair {
  double u1 = 0.0;
  double u2 = 0.0;
  friend bool operator==(const PayoffPair&, const PayoffPair&) = default;
};

struct JointAction {
  std::size_t a1 = 0;
  std::size_t a2 = 0;
  friend bool operator==(const JointAction&, const JointAction&) = default;
};

// m x m grid of payoff pairs. Row index is player one's action, column index
// is player two's action.
class PayoffBimatrix {
 public:
  PayoffBimatrix() = default;
  explicit PayoffBimatrix(std::size_t m) { resize(m); }
  PayoffBimatrix(std::initializer_list<std::initializer_list<PayoffPair>> rows) {
    resize(rows.size());
    std::size_t r = 0;
    for (const auto& row : rows) {
      if (row.size() != m_) throw std::invalid_argument("PayoffBimatrix: rows must form a square grid");
      std::copy(row.begin(), row.end(), cells_.begin() + static_cast<std::ptrdiff_t>(r * m_));
      ++r;
    }
  }

  void resize(std::size_t m) {
    if (m < 1 || m > kMaxActions) {
      throw std::invalid_argument("PayoffBimatrix: action count must lie in [1, " +
                                  std::to_string(kMaxActions) + "]");
    }
    m_ = m;
    cells_.resize(m * m);
  }

  std::size_t size() const { return m_; }

  PayoffPair& operator()(std::size_t a1, std::size_t a2) { return cells_[a1 * m_ + a2]; }
  const PayoffPair& operator()(std::size_t a1, std::size_t a2) const { return cells_[a1 * m_ + a2]; }
  const PayoffPair& operator()(JointAction a) const { return (*this)(a.a1, a.a2); }

  const std::vector<PayoffPair>& cells() const { return cells_; }
  std::vector<PayoffPair>& cells() { return cells_; }

  // Payoff of the player in `seat` when it plays `own` and the opponent plays `opp`.
  double own_payoff(Seat seat, std::size_t own, std::size_t opp) const {
    return seat == Seat::One ? (*this)(own, opp).u1 : (*this)(opp, own).u2;
  }
  // Payoff of the opponent of `seat` in the same situation.
  double opponent_payoff(Seat seat, std::size_t own, std::size_t opp) const {
    return seat == Seat::One ? (*this)(own, opp).u2 : (*this)(opp, own).u1;
  }

  friend bool operator==(const PayoffBimatrix&, const PayoffBimatrix&) = default;

 private:
  std::size_t m_ = 0;
  std::vector<PayoffPair> cells_;
};

struct GenerationParams {
  std::size_t m = 4;
  double alpha = 1.2;    // inflation constant
  double r_bound = 3.0;  // R ~ U(-r_bound, r_bound)
  double z_bound = 2.0;  // multiplier z ~ U(0, z_bound)

  void validate() const {
    if (m < 2 || m > kMaxActions) throw std::invalid_argument("m must lie in [2, 16]");
    if (!(r_bound > 0.0) || !std::isfinite(r_bound)) throw std::invalid_argument("r_bound must be positive");
    if (!(z_bound >= 0.0) || !std::isfinite(z_bound)) throw std::invalid_argument("z_bound must be non-negative");
    if (!std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite");
  }
};

// Fills `out` with a fresh game. Per cell, in row-major order, three draws:
// R, then z for u1, then z for u2.
template <BitGenerator64 G>
void generate_payoff_matrix_into(const GenerationParams& params, G& gen, PayoffBimatrix& out) {
  out.resize(params.m);
  const double inflation = params.alpha - 1.0;
  for (auto& cell : out.cells()) {
    const double r = uniform(gen, -params.r_bound, params.r_bound);
    const double z1 = uniform(gen, 0.0, params.z_bound);
    const double z2 = uniform(gen, 0.0, params.z_bound);
    const double abs_r = std::abs(r);
    cell.u1 = r + z1 * abs_r * inflation;
    cell.u2 = -r + z2 * abs_r * inflation;
  }
}

template <BitGenerator64 G>
PayoffBimatrix generate_payoff_matrix(const GenerationParams& params, G& gen) {
  params.validate();
  PayoffBimatrix out(params.m);
  generate_payoff_matrix_into(params, gen, out);
  return out;
}

inline constexpr double kDefaultNoiseBase = 10.0;

inline void check_intelligence(double q, double noise_base) {
  if (!(q >= 0.0 && q <= noise_base)) {
    throw std::invalid_argument("intelligence q must lie in [0, " + std::to_string(noise_base) + "]");
  }
}

// Noisy view of `truth` for an observer of intelligence q: every payoff is
// shifted by w*(a - b) with a, b ~ U(0, 1) and w = noise_base - q. One draw
// per payoff entry, u1 before u2, cells in row-major order.
template <BitGenerator64 G>
void observe_noisy_into(const PayoffBimatrix& truth, double q, G& gen, PayoffBimatrix& out,
                        double noise_base = kDefaultNoiseBase) {
  const double width = noise_base - q;
  out.resize(truth.size());
  const auto& src = truth.cells();
  auto& dst = out.cells();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i].u1 = src[i].u1 + width * uniform_difference(gen);
    dst[i].u2 = src[i].u2 + width * uniform_difference(gen);
  }
}

template <BitGenerator64 G>
PayoffBimatrix observe_noisy(const PayoffBimatrix& truth, double q, G& gen,
                             double noise_base = kDefaultNoiseBase) {
  check_intelligence(q, noise_base);
  PayoffBimatrix out(truth.size());
  observe_noisy_into(truth, q, gen, out, noise_base);
  return out;
}

namespace detail {

struct BestResponseTable {
  std::array<double, kMaxActions> col_max_u1{};  // best u1 in each column
  std::array<double, kMaxActions> row_max_u2{};  // best u2 in each row

  explicit BestResponseTable(const PayoffBimatrix& g) {
    const std::size_t m = g.size();
    for (std::size_t i = 0; i < m; ++i) {
      col_max_u1[i] = -std::numeric_limits<double>::infinity();
      row_max_u2[i] = -std::numeric_limits<double>::infinity();
    }
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) {
        const auto& cell = g(r, c);
        col_max_u1[c] = std::max(col_max_u1[c], cell.u1);
        row_max_u2[r] = std::max(row_max_u2[r], cell.u2);
      }
    }
  }

  bool is_equilibrium(const PayoffBimatrix& g, std::size_t r, std::size_t c) const {
    const auto& cell = g(r, c);
    return cell.u1 >= col_max_u1[c] && cell.u2 >= row_max_u2[r];
  }
};

}  // namespace detail

// Every weak pure-strategy Nash equilibrium, in row-major order.
inline std::vector<JointAction> pure_nash_equilibria(const PayoffBimatrix& g) {
  std::vector<JointAction> out;
  const detail::BestResponseTable table(g);
  for (std::size_t r = 0; r < g.size(); ++r) {
    for (std::size_t c = 0; c < g.size(); ++c) {
      if (table.is_equilibrium(g, r, c)) out.push_back({r, c});
    }
  }
  return out;
}

// Best own action against an opponent playing uniformly at random.
inline std::size_t best_against_uniform(const PayoffBimatrix& g, Seat seat) {
  const std::size_t m = g.size();
  std::size_t best = 0;
  double best_sum = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < m; ++a) {
    double sum = 0.0;
    for (std::size_t b = 0; b < m; ++b) sum += g.own_payoff(seat, a, b);
    if (sum > best_sum) {
      best_sum = sum;
      best = a;
    }
  }
  return best;
}

// The human decision ladder: among pure equilibria take the one best for
// the decider, then best for the opponent, then the first in row-major
// order. Without any pure equilibrium, best response to a uniform opponent.
inline std::size_t select_nash_action(const PayoffBimatrix& g, Seat seat) {
  const std::size_t m = g.size();
  const detail::BestResponseTable table(g);
  bool found = false;
  JointAction chosen{};
  double best_own = 0.0;
  double best_opp = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      if (!table.is_equilibrium(g, r, c)) continue;
      const auto& cell = g(r, c);
      const double own = seat == Seat::One ? cell.u1 : cell.u2;
      const double opp = seat == Seat::One ? cell.u2 : cell.u1;
      if (!found || own > best_own || (own == best_own && opp > best_opp)) {
        found = true;
        chosen = {r, c};
        best_own = own;
        best_opp = opp;
      }
    }
  }
  if (found) return seat == Seat::One ? chosen.a1 : chosen.a2;
  return best_against_uniform(g, seat);
}

// Cell maximising u1 + u2, first in row-major order on ties.
inline JointAction joint_sum_argmax(const PayoffBimatrix& g) {
  JointAction best{};
  double best_sum = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < g.size(); ++r) {
    for (std::size_t c = 0; c < g.size(); ++c) {
      const double s = g(r, c).u1 + g(r, c).u2;
      if (s > best_sum) {
        best_sum = s;
        best = {r, c};
      }
    }
  }
  return best;
}

}  // namespace normdyn
