#pragma once

// Multi-seed experiment drivers behind the presets. Runs are distributed
// over a worker pool; each run is sequential and seeded from seed_base + run
// index, so results do not depend on the number of workers.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>
#include <vector>

#include "normdyn/dynamics.hpp"
#include "normdyn/metrics.hpp"

namespace normdyn {

struct BatchOptions {
  std::size_t runs = 20;
  std::uint64_t seed_base = 1;
  std::size_t jobs = 1;
  std::ostream* progress = nullptr;  // textual counter, one line per finished task

  std::uint64_t seed(std::size_t run) const { return seed_base + run; }
};

// Calls f(i) for i in [0, count) on up to `jobs` threads. The first exception
// thrown by any task is rethrown after all workers stop.
template <class F>
void parallel_for(std::size_t count, std::size_t jobs, F&& f, std::ostream* progress = nullptr) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;
  std::size_t done = 0;
  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
      std::lock_guard<std::mutex> lock(mu);
      ++done;
      if (progress) *progress << "  [" << done << "/" << count << "]\n" << std::flush;
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

struct Stat {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
};

// Mean and sample standard deviation, NaN entries skipped.
inline Stat stat_of(const std::vector<double>& xs) {
  Stat s;
  double sum = 0.0;
  for (double x : xs) {
    if (std::isnan(x)) continue;
    sum += x;
    ++s.n;
  }
  if (s.n == 0) return s;
  s.mean = sum / static_cast<double>(s.n);
  double sq = 0.0;
  for (double x : xs) {
    if (!std::isnan(x)) sq += (x - s.mean) * (x - s.mean);
  }
  s.sd = s.n > 1 ? std::sqrt(sq / static_cast<double>(s.n - 1)) : 0.0;
  return s;
}

// ---- evolving populations -------------------------------------------------

inline std::vector<SimulationTrace> simulate_batch(const WorldParams& world, std::uint64_t record_every,
                                                   const BatchOptions& opt) {
  std::vector<SimulationTrace> traces(opt.runs);
  parallel_for(
      opt.runs, opt.jobs,
      [&](std::size_t r) {
        WorldParams p = world;
        p.seed = opt.seed(r);
        traces[r] = run_simulation(p, record_every);
      },
      opt.progress);
  return traces;
}

struct FinalStateSummary {
  std::array<Stat, kKindCount> share{};
  std::array<Stat, kKindCount> fitness{};
  Stat fitness_total;
  Stat gini;
  std::size_t runs = 0;
  std::size_t runs_changed_in_tail = 0;  // composition at 0.9 N differs from the end
};

inline FinalStateSummary summarize_final(const std::vector<SimulationTrace>& traces) {
  FinalStateSummary s;
  s.runs = traces.size();
  std::array<std::vector<double>, kKindCount> share, fit;
  std::vector<double> total, g;
  for (const auto& t : traces) {
    if (t.records.empty()) continue;
    const auto& last = t.records.back();
    std::size_t n = 0;
    for (auto c : last.counts) n += c;
    for (std::size_t k = 0; k < kKindCount; ++k) {
      share[k].push_back(static_cast<double>(last.counts[k]) / static_cast<double>(n));
      fit[k].push_back(last.mean_fitness[k]);
    }
    total.push_back(last.mean_fitness_total);
    g.push_back(last.gini);
    if (t.counts_at_90pct && *t.counts_at_90pct != last.counts) ++s.runs_changed_in_tail;
  }
  for (std::size_t k = 0; k < kKindCount; ++k) {
    s.share[k] = stat_of(share[k]);
    s.fitness[k] = stat_of(fit[k]);
  }
  s.fitness_total = stat_of(total);
  s.gini = stat_of(g);
  return s;
}

// ---- static populations ---------------------------------------------------

struct PopulationMeasurement {
  double f_h = std::numeric_limits<double>::quiet_NaN();
  double f_ai = std::numeric_limits<double>::quiet_NaN();
  double f_total = std::numeric_limits<double>::quiet_NaN();
  double gini = std::numeric_limits<double>::quiet_NaN();
};

// Census of a population; f_ai pools every A.I. kind present.
template <BitGenerator64 G>
PopulationMeasurement measure_population(const World& world, G& gen) {
  const auto& agents = world.agents();
  const std::vector<double> f = census_fitness(agents, world.params(), gen);
  double sh = 0.0, sa = 0.0, st = 0.0;
  std::size_t nh = 0, na = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    st += f[i];
    if (agents[i].kind == AgentKind::Human) {
      sh += f[i];
      ++nh;
    } else {
      sa += f[i];
      ++na;
    }
  }
  PopulationMeasurement m;
  if (nh) m.f_h = sh / static_cast<double>(nh);
  if (na) m.f_ai = sa / static_cast<double>(na);
  m.f_total = st / static_cast<double>(f.size());
  try {
    m.gini = gini(f);
  } catch (const std::domain_error&) {
  }
  return m;
}

struct MeasurementStats {
  Stat f_h, f_ai, f_total, gini;
};

inline MeasurementStats stats_of(const std::vector<PopulationMeasurement>& ms) {
  std::vector<double> h, a, t, g;
  for (const auto& m : ms) {
    h.push_back(m.f_h);
    a.push_back(m.f_ai);
    t.push_back(m.f_total);
    g.push_back(m.gini);
  }
  return {stat_of(h), stat_of(a), stat_of(t), stat_of(g)};
}

// Static population with k agents of `ai_kind`, measured once per run.
inline MeasurementStats measure_static(std::size_t k, AgentKind ai_kind, const WorldParams& world, std::uint64_t tag,
                                       const BatchOptions& opt) {
  std::vector<PopulationMeasurement> ms(opt.runs);
  parallel_for(opt.runs, opt.jobs, [&](std::size_t r) {
    Engine gen = derive_engine(opt.seed(r), tag);
    const World w = make_static_world(k, ai_kind, world, gen);
    ms[r] = measure_population(w, gen);
  });
  return stats_of(ms);
}

struct HomogeneousRow {
  AgentKind kind = AgentKind::Human;
  Stat fitness;
  Stat gini;
};

// Order of the rows in the homogeneous-world table.
inline constexpr std::array<AgentKind, kKindCount> kHomogeneousOrder = {
    AgentKind::Human, AgentKind::NashEQ, AgentKind::Selfish, AgentKind::HConscious, AgentKind::Utilitarian};

inline HomogeneousRow homogeneous_world(AgentKind kind, const WorldParams& world, const BatchOptions& opt) {
  constexpr std::uint64_t kTag = 0x686f6d6f00000000ULL;
  HomogeneousRow row;
  row.kind = kind;
  const MeasurementStats s = kind == AgentKind::Human
                                 ? measure_static(0, AgentKind::NashEQ, world, kTag, opt)
                                 : measure_static(world.n, kind, world, kTag + index_of(kind), opt);
  row.fitness = s.f_total;
  row.gini = s.gini;
  return row;
}

inline std::vector<HomogeneousRow> homogeneous_table(const WorldParams& world, const BatchOptions& opt) {
  std::vector<HomogeneousRow> rows;
  for (auto k : kHomogeneousOrder) rows.push_back(homogeneous_world(k, world, opt));
  return rows;
}

// ---- imitation gradients --------------------------------------------------

inline GradientCurve mean_gradient_curve(AgentKind ai_kind, const WorldParams& world,
                                         const std::vector<std::size_t>& k_grid, std::size_t samples,
                                         const BatchOptions& opt) {
  constexpr std::uint64_t kTag = 0x6772616400000000ULL;
  std::vector<GradientCurve> curves(opt.runs);
  parallel_for(
      opt.runs, opt.jobs,
      [&](std::size_t r) {
        Engine gen = derive_engine(opt.seed(r), kTag + index_of(ai_kind));
        curves[r] = gradient_curve(ai_kind, world, k_grid, samples, gen);
      },
      opt.progress);
  return average_curves(curves, world.beta, world.price);
}

inline std::optional<ZeroCrossing> first_stable_crossing(const GradientCurve& curve) {
  for (const auto& z : curve.crossings) {
    if (z.stable) return z;
  }
  return std::nullopt;
}

struct EquilibriumRow {
  AgentKind kind = AgentKind::Selfish;
  std::optional<ZeroCrossing> crossing;  // none: the A.I. share settles at 0
  std::size_t k = 0;
  MeasurementStats at;
};

inline EquilibriumRow equilibrium_at_crossing(const GradientCurve& curve, const WorldParams& world,
                                              const BatchOptions& opt) {
  constexpr std::uint64_t kTag = 0x6571756900000000ULL;
  EquilibriumRow row;
  row.kind = curve.ai_kind;
  row.crossing = first_stable_crossing(curve);
  if (row.crossing) row.k = static_cast<std::size_t>(std::llround(row.crossing->k_star));
  row.at = measure_static(row.k, row.kind, world, kTag + index_of(row.kind), opt);
  return row;
}

// ---- A.I. share sweep -----------------------------------------------------

struct ShareSweepPoint {
  AgentKind kind = AgentKind::Selfish;
  double share = 0.0;
  std::size_t k = 0;
  MeasurementStats at;
};

inline std::vector<ShareSweepPoint> share_sweep(const std::vector<AgentKind>& kinds, const std::vector<double>& shares,
                                                const WorldParams& world, const BatchOptions& opt) {
  constexpr std::uint64_t kTag = 0x7368617200000000ULL;
  std::vector<ShareSweepPoint> out;
  for (auto kind : kinds) {
    for (std::size_t i = 0; i < shares.size(); ++i) {
      ShareSweepPoint pt;
      pt.kind = kind;
      pt.share = shares[i];
      pt.k = static_cast<std::size_t>(std::llround(shares[i] * static_cast<double>(world.n)));
      pt.at = measure_static(pt.k, kind, world, kTag + (index_of(kind) << 16) + i, opt);
      out.push_back(pt);
    }
  }
  return out;
}

// Share at which A.I. fitness under `a` drops to or below that under `b`,
// interpolated linearly between sweep points; nullopt when it never does.
inline std::optional<double> sweep_crossover(const std::vector<ShareSweepPoint>& pts, AgentKind a, AgentKind b) {
  std::vector<std::pair<double, double>> diff;  // (share, f_ai[a] - f_ai[b])
  for (const auto& pa : pts) {
    if (pa.kind != a) continue;
    for (const auto& pb : pts) {
      if (pb.kind == b && pb.share == pa.share && !std::isnan(pa.at.f_ai.mean) && !std::isnan(pb.at.f_ai.mean)) {
        diff.emplace_back(pa.share, pa.at.f_ai.mean - pb.at.f_ai.mean);
      }
    }
  }
  for (std::size_t i = 0; i + 1 < diff.size(); ++i) {
    const auto [s0, d0] = diff[i];
    const auto [s1, d1] = diff[i + 1];
    if (d0 > 0.0 && d1 <= 0.0) return s0 + (s1 - s0) * d0 / (d0 - d1);
  }
  return std::nullopt;
}

}  // namespace normdyn
