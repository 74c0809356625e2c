#pragma once

// Inequality and selection-direction measurements.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "normdyn/dynamics.hpp"
#include "normdyn/gini.hpp"

namespace normdyn {

struct GradientEstimate {
  std::size_t k = 0;
  std::size_t n = 0;
  AgentKind ai_kind = AgentKind::Selfish;
  double t_plus = 0.0;
  double t_minus = 0.0;
  double g = 0.0;
  double f_h_mean = std::numeric_limits<double>::quiet_NaN();
  double f_ai_mean = std::numeric_limits<double>::quiet_NaN();
  std::size_t samples = 0;

  double frac_ai() const { return n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n); }
};

// Sign change of G between two adjacent grid points.
struct ZeroCrossing {
  std::size_t k_lo = 0;
  std::size_t k_hi = 0;
  double k_star = 0.0;     // linear interpolation of G between k_lo and k_hi
  double frac_star = 0.0;  // k_star / n
  bool stable = false;     // G goes from positive to non-positive
};

struct GradientCurve {
  AgentKind ai_kind = AgentKind::Selfish;
  std::vector<GradientEstimate> points;
  std::vector<ZeroCrossing> crossings;
};

inline double adoption_gate(double f_h, double price) { return f_h >= price ? 1.0 : 0.0; }

// Fills T+, T- and G from the group means already stored in `est`:
//   T+ = (n-k)/n * k/n * p(f_H, f_AI) * tau(f_H)
//   T- = k/n * (n-k)/n * p(f_AI, f_H)
inline void apply_transition_rates(GradientEstimate& est, double beta, double price) {
  if (est.k == 0 || est.k == est.n) {
    est.t_plus = est.t_minus = est.g = 0.0;
    return;
  }
  const double n = static_cast<double>(est.n);
  const double mix = (n - static_cast<double>(est.k)) / n * (static_cast<double>(est.k) / n);
  est.t_plus = mix * fermi_probability(est.f_h_mean, est.f_ai_mean, beta) * adoption_gate(est.f_h_mean, price);
  est.t_minus = mix * fermi_probability(est.f_ai_mean, est.f_h_mean, beta);
  est.g = est.t_plus - est.t_minus;
}

// Static population of n-k humans (indices [0, n-k)) followed by k agents of
// `ai_kind`. HConscious agents each play one round robin so their ledgers are
// not all sitting at the fresh (0, 0) state.
template <BitGenerator64 G>
World make_static_world(std::size_t k, AgentKind ai_kind, const WorldParams& params, G& gen) {
  if (!is_ai(ai_kind)) throw std::invalid_argument("make_static_world: ai_kind must be an A.I. kind");
  if (k > params.n) throw std::invalid_argument("make_static_world: k must lie in [0, n]");
  WorldParams p = params;
  p.enabled_kinds = {AgentKind::Human, ai_kind};
  KindCounts counts{};
  counts[index_of(AgentKind::Human)] = params.n - k;
  counts[index_of(ai_kind)] = k;
  p.initial_composition = counts;
  std::vector<Individual> agents;
  agents.reserve(p.n);
  for (std::size_t i = 0; i < p.n - k; ++i) agents.push_back(make_individual(AgentKind::Human, p.policy, gen));
  for (std::size_t i = 0; i < k; ++i) agents.push_back(make_individual(ai_kind, p.policy, gen));
  World world(p, std::move(agents), Engine(gen()));
  if (ai_kind == AgentKind::HConscious) {
    for (std::size_t i = p.n - k; i < p.n; ++i) round_robin_fitness(world, i, gen);
  }
  return world;
}

// Group fitness is the mean of `samples` round-robin evaluations of
// uniformly drawn members of a static population.
template <BitGenerator64 G>
GradientEstimate imitation_gradient(std::size_t k, AgentKind ai_kind, const WorldParams& params, std::size_t samples,
                                    G& gen) {
  if (!is_ai(ai_kind)) throw std::invalid_argument("imitation_gradient: ai_kind must be an A.I. kind");
  if (k > params.n) throw std::invalid_argument("imitation_gradient: k must lie in [0, n]");
  if (samples == 0) throw std::invalid_argument("imitation_gradient: samples must be positive");

  GradientEstimate est;
  est.k = k;
  est.n = params.n;
  est.ai_kind = ai_kind;
  est.samples = samples;
  if (k == 0 || k == params.n) return est;

  World world = make_static_world(k, ai_kind, params, gen);
  const std::size_t humans = params.n - k;
  const WorldParams& p = world.params();
  double sum_h = 0.0;
  double sum_ai = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    sum_h += round_robin_fitness(world, uniform_index(gen, humans), gen);
    sum_ai += round_robin_fitness(world, humans + uniform_index(gen, k), gen);
  }
  est.f_h_mean = sum_h / static_cast<double>(samples);
  est.f_ai_mean = sum_ai / static_cast<double>(samples);
  apply_transition_rates(est, p.beta, p.price);
  return est;
}

// Sign changes of G over interior grid points (the endpoints k = 0 and k = n
// are zero by construction and skipped).
inline std::vector<ZeroCrossing> find_zero_crossings(const std::vector<GradientEstimate>& points) {
  std::vector<ZeroCrossing> out;
  const GradientEstimate* prev = nullptr;
  for (const auto& pt : points) {
    if (pt.k == 0 || pt.k == pt.n) continue;
    if (prev && ((prev->g > 0.0) != (pt.g > 0.0))) {
      ZeroCrossing z;
      z.k_lo = prev->k;
      z.k_hi = pt.k;
      const double denom = prev->g - pt.g;
      const double t = denom != 0.0 ? prev->g / denom : 0.5;
      z.k_star = static_cast<double>(prev->k) + t * (static_cast<double>(pt.k) - static_cast<double>(prev->k));
      z.frac_star = z.k_star / static_cast<double>(pt.n);
      z.stable = prev->g > 0.0;
      out.push_back(z);
    }
    prev = &pt;
  }
  return out;
}

template <BitGenerator64 G>
GradientCurve gradient_curve(AgentKind ai_kind, const WorldParams& params, const std::vector<std::size_t>& k_grid,
                             std::size_t samples, G& gen) {
  for (auto k : k_grid) {
    if (k > params.n) throw std::invalid_argument("gradient_curve: grid point outside [0, n]");
  }
  GradientCurve curve;
  curve.ai_kind = ai_kind;
  curve.points.reserve(k_grid.size());
  for (auto k : k_grid) curve.points.push_back(imitation_gradient(k, ai_kind, params, samples, gen));
  curve.crossings = find_zero_crossings(curve.points);
  return curve;
}

// Point-wise mean of curves computed on the same grid; group fitness means
// are averaged and the transition rates recomputed from them, and crossings
// are detected on the averaged G.
inline GradientCurve average_curves(const std::vector<GradientCurve>& curves, double beta, double price) {
  if (curves.empty()) throw std::invalid_argument("average_curves: no curves");
  GradientCurve mean = curves.front();
  for (std::size_t i = 0; i < mean.points.size(); ++i) {
    double fh = 0.0;
    double fai = 0.0;
    std::size_t samples = 0;
    for (const auto& c : curves) {
      if (c.points.size() != mean.points.size() || c.points[i].k != mean.points[i].k) {
        throw std::invalid_argument("average_curves: grids differ");
      }
      fh += c.points[i].f_h_mean;
      fai += c.points[i].f_ai_mean;
      samples += c.points[i].samples;
    }
    auto& pt = mean.points[i];
    pt.f_h_mean = fh / static_cast<double>(curves.size());
    pt.f_ai_mean = fai / static_cast<double>(curves.size());
    pt.samples = samples;
    apply_transition_rates(pt, beta, price);
  }
  mean.crossings = find_zero_crossings(mean.points);
  return mean;
}

// Evenly spaced grid 0, n/steps, ..., n (rounded, duplicates dropped).
inline std::vector<std::size_t> even_grid(std::size_t n, std::size_t steps) {
  std::vector<std::size_t> grid;
  for (std::size_t i = 0; i <= steps; ++i) {
    const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * static_cast<double>(i) /
                                                         static_cast<double>(steps)));
    if (grid.empty() || grid.back() != k) grid.push_back(k);
  }
  return grid;
}

}  // namespace normdyn
