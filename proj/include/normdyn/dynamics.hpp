#pragma once

// Population process: pairwise interactions, round-robin fitness, Fermi
// imitation gated by the adoption price, mutation, and traced runs.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "normdyn/agents.hpp"
#include "normdyn/game_core.hpp"
#include "normdyn/gini.hpp"
#include "normdyn/random.hpp"

namespace normdyn {

inline constexpr double kFreePrice = -std::numeric_limits<double>::infinity();

using KindCounts = std::array<std::size_t, kKindCount>;

struct WorldParams {
  std::size_t n = 500;
  GenerationParams game;
  PolicyParams policy;
  double beta = 0.1;
  double mu = 0.0005;
  double price = 37.0;  // kFreePrice disables the gate
  std::uint64_t iterations = 20000;
  std::vector<AgentKind> enabled_kinds{kAllKinds.begin(), kAllKinds.end()};
  std::optional<KindCounts> initial_composition;  // default: 90% human, rest split over enabled A.I.
  std::size_t fitness_samples = 1;
  std::uint64_t seed = 1;
  bool self_play = false;       // add a game against a copy of oneself to every round robin
  bool mutation_gated = false;  // human -> A.I. mutation also has to clear the price
  bool bystander_ledgers = false;  // opponents' HConscious ledgers also advance during a round robin

  bool enabled(AgentKind k) const {
    return std::find(enabled_kinds.begin(), enabled_kinds.end(), k) != enabled_kinds.end();
  }

  KindCounts composition() const {
    if (initial_composition) return *initial_composition;
    KindCounts counts{};
    std::vector<AgentKind> ai;
    for (auto k : enabled_kinds) {
      if (is_ai(k)) ai.push_back(k);
    }
    if (ai.empty()) {
      counts[index_of(AgentKind::Human)] = n;
      return counts;
    }
    const auto humans = static_cast<std::size_t>(std::llround(0.9 * static_cast<double>(n)));
    counts[index_of(AgentKind::Human)] = humans;
    const std::size_t rest = n - humans;
    for (std::size_t i = 0; i < ai.size(); ++i) {
      counts[index_of(ai[i])] = rest / ai.size() + (i < rest % ai.size() ? 1 : 0);
    }
    return counts;
  }

  void validate() const {
    game.validate();
    policy.validate();
    if (n < 2) throw std::invalid_argument("n must be at least 2");
    if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("mu must lie in [0,1]");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
    if (std::isnan(price) || price == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("price must be a finite number or free");
    }
    if (fitness_samples < 1) throw std::invalid_argument("fitness_samples must be at least 1");
    if (!enabled(AgentKind::Human)) throw std::invalid_argument("enabled kinds must include human");
    const KindCounts counts = composition();
    std::size_t total = 0;
    for (auto k : kAllKinds) {
      const std::size_t c = counts[index_of(k)];
      if (c > 0 && !enabled(k)) {
        throw std::invalid_argument("initial composition uses disabled kind " + std::string(to_string(k)));
      }
      total += c;
    }
    if (total != n) throw std::invalid_argument("initial composition must sum to n");
  }
};

// Scratch matrices reused across interactions.
struct InteractionWorkspace {
  PayoffBimatrix truth;
  PayoffBimatrix view_one;
  PayoffBimatrix view_two;
  PayoffBimatrix counterfactual;
};

struct InteractionOutcome {
  JointAction actions;
  double u1 = 0.0;
  double u2 = 0.0;
};

// Resolves one interaction on a given true game. When exactly one side is
// human, the A.I. predicts it from the very view the human plays on. Ledger
// sinks, when non-null, receive HConscious bookkeeping for that side.
template <BitGenerator64 G>
InteractionOutcome resolve_interaction(const Individual& first, const Individual& second,
                                       const PayoffBimatrix& truth, const PolicyParams& p, G& gen,
                                       InteractionWorkspace& ws, HConsciousLedger* first_ledger = nullptr,
                                       HConsciousLedger* second_ledger = nullptr) {
  const bool human_one = first.kind == AgentKind::Human;
  const bool human_two = second.kind == AgentKind::Human;
  InteractionOutcome out;
  if (human_one && human_two) {
    observe_noisy_into(truth, first.q, gen, ws.view_one, p.noise_base);
    out.actions.a1 = select_nash_action(ws.view_one, Seat::One);
    observe_noisy_into(truth, second.q, gen, ws.view_two, p.noise_base);
    out.actions.a2 = select_nash_action(ws.view_two, Seat::Two);
  } else if (!human_one && !human_two) {
    out.actions.a1 = act_versus_ai(first.kind, Seat::One, truth);
    out.actions.a2 = act_versus_ai(second.kind, Seat::Two, truth);
  } else if (human_two) {
    out.actions.a2 = predict_human_action_into(truth, second, Seat::Two, p, gen, ws.view_two);
    out.actions.a1 = act_versus_human(first, Seat::One, truth, out.actions.a2);
    if (p.independent_prediction) {
      out.actions.a2 = predict_human_action_into(truth, second, Seat::Two, p, gen, ws.view_two);
    }
  } else {
    out.actions.a1 = predict_human_action_into(truth, first, Seat::One, p, gen, ws.view_one);
    out.actions.a2 = act_versus_human(second, Seat::Two, truth, out.actions.a1);
    if (p.independent_prediction) {
      out.actions.a1 = predict_human_action_into(truth, first, Seat::One, p, gen, ws.view_one);
    }
  }
  const PayoffPair& cell = truth(out.actions);
  out.u1 = cell.u1;
  out.u2 = cell.u2;

  if (first_ledger && first.kind == AgentKind::HConscious && human_two) {
    hconscious_ledger_update(*first_ledger, second, out.actions.a2, out.u2, truth, Seat::One, p, gen,
                             ws.counterfactual);
  }
  if (second_ledger && second.kind == AgentKind::HConscious && human_one) {
    hconscious_ledger_update(*second_ledger, first, out.actions.a1, out.u1, truth, Seat::Two, p, gen,
                             ws.counterfactual);
  }
  return out;
}

// One interaction on a freshly generated game, both ledgers advancing.
template <BitGenerator64 G>
std::pair<double, double> play_interaction(Individual& first, Individual& second, const WorldParams& params,
                                           G& gen) {
  InteractionWorkspace ws;
  generate_payoff_matrix_into(params.game, gen, ws.truth);
  const auto out =
      resolve_interaction(first, second, ws.truth, params.policy, gen, ws, &first.ledger, &second.ledger);
  return {out.u1, out.u2};
}

// Fermi pairwise-comparison probability that x imitates y.
inline double fermi_probability(double f_x, double f_y, double beta) {
  const double d = beta * (f_y - f_x);
  if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
  const double e = std::exp(d);
  return e / (1.0 + e);
}

class World {
 public:
  explicit World(WorldParams params) : params_(std::move(params)), rng_(params_.seed) {
    params_.validate();
    const KindCounts counts = params_.composition();
    agents_.reserve(params_.n);
    for (auto k : kAllKinds) {
      for (std::size_t i = 0; i < counts[index_of(k)]; ++i) agents_.push_back(make_individual(k, params_.policy, rng_));
    }
  }

  World(WorldParams params, std::vector<Individual> agents, Engine rng)
      : params_(std::move(params)), agents_(std::move(agents)), rng_(std::move(rng)) {
    params_.validate();
    if (agents_.size() != params_.n) throw std::invalid_argument("World: agent count must equal n");
  }

  const WorldParams& params() const { return params_; }
  std::vector<Individual>& agents() { return agents_; }
  const std::vector<Individual>& agents() const { return agents_; }
  Engine& rng() { return rng_; }
  InteractionWorkspace& workspace() { return ws_; }
  std::uint64_t iteration() const { return iteration_; }
  void advance_iteration() { ++iteration_; }

  KindCounts counts() const {
    KindCounts c{};
    for (const auto& a : agents_) ++c[index_of(a.kind)];
    return c;
  }

 private:
  WorldParams params_;
  std::vector<Individual> agents_;
  Engine rng_;
  InteractionWorkspace ws_;
  std::uint64_t iteration_ = 0;
};

// Sum of the payoffs the agent at `index` collects from one interaction with
// every other agent (the focal agent sits in seat one), averaged over
// fitness_samples round robins and cached on the agent. Only the focal
// agent's ledger advances (unless bystander_ledgers is set); opponents'
// fitness is left untouched.
template <BitGenerator64 G>
double round_robin_fitness(World& world, std::size_t index, G& gen) {
  auto& agents = world.agents();
  if (index >= agents.size()) throw std::out_of_range("round_robin_fitness: index out of range");
  const WorldParams& p = world.params();
  auto& ws = world.workspace();
  Individual& focal = agents[index];
  double total = 0.0;
  for (std::size_t s = 0; s < p.fitness_samples; ++s) {
    for (std::size_t j = 0; j < agents.size(); ++j) {
      if (j == index) continue;
      generate_payoff_matrix_into(p.game, gen, ws.truth);
      HConsciousLedger* other_ledger = p.bystander_ledgers ? &agents[j].ledger : nullptr;
      total += resolve_interaction(focal, agents[j], ws.truth, p.policy, gen, ws, &focal.ledger, other_ledger).u1;
    }
    if (p.self_play) {
      const Individual twin = focal;
      generate_payoff_matrix_into(p.game, gen, ws.truth);
      total += resolve_interaction(focal, twin, ws.truth, p.policy, gen, ws).u1;
    }
  }
  focal.fitness = total / static_cast<double>(p.fitness_samples);
  return focal.fitness;
}

inline double round_robin_fitness(World& world, std::size_t index) {
  return round_robin_fitness(world, index, world.rng());
}

// Fitness of every agent at once: each unordered pair plays one game and both
// sides book their payoff. A measurement only: no ledger or cached fitness
// changes.
template <BitGenerator64 G>
std::vector<double> census_fitness(const std::vector<Individual>& agents, const WorldParams& p, G& gen) {
  std::vector<double> fitness(agents.size(), 0.0);
  InteractionWorkspace ws;
  for (std::size_t s = 0; s < p.fitness_samples; ++s) {
    for (std::size_t i = 0; i < agents.size(); ++i) {
      for (std::size_t j = i + 1; j < agents.size(); ++j) {
        generate_payoff_matrix_into(p.game, gen, ws.truth);
        const auto out = resolve_interaction(agents[i], agents[j], ws.truth, p.policy, gen, ws);
        fitness[i] += out.u1;
        fitness[j] += out.u2;
      }
      if (p.self_play) {
        generate_payoff_matrix_into(p.game, gen, ws.truth);
        fitness[i] += resolve_interaction(agents[i], agents[i], ws.truth, p.policy, gen, ws).u1;
      }
    }
  }
  for (auto& f : fitness) f /= static_cast<double>(p.fitness_samples);
  return fitness;
}

enum class StepOutcome { Mutation, Imitation, BlockedByCost, NoOp };

inline const char* to_string(StepOutcome o) {
  switch (o) {
    case StepOutcome::Mutation: return "mutation";
    case StepOutcome::Imitation: return "imitation";
    case StepOutcome::BlockedByCost: return "blocked_by_cost";
    case StepOutcome::NoOp: return "no_op";
  }
  return "?";
}

struct StepEvent {
  StepOutcome outcome = StepOutcome::NoOp;
  std::size_t first = 0;
  std::size_t second = 0;
  AgentKind first_before = AgentKind::Human;
  AgentKind first_after = AgentKind::Human;
  AgentKind second_before = AgentKind::Human;
  AgentKind second_after = AgentKind::Human;
  double f1 = std::numeric_limits<double>::quiet_NaN();
  double f2 = std::numeric_limits<double>::quiet_NaN();
};

inline bool adoption_allowed(AgentKind from, AgentKind to, double fitness, double price) {
  if (from == AgentKind::Human && is_ai(to)) return fitness >= price;
  return true;
}

// One iteration of the population process:
//  1. pick two distinct agents uniformly;
//  2. each mutates with probability mu to a uniformly drawn enabled kind,
//     and any mutation ends the iteration;
//  3. both fitnesses are evaluated afresh;
//  4. if the kinds differ, the first imitates the second with the Fermi
//     probability;
//  5. a human may only adopt an A.I. kind if its fitness is at least price.
inline StepEvent step(World& world) {
  auto& gen = world.rng();
  auto& agents = world.agents();
  const WorldParams& p = world.params();
  world.advance_iteration();

  StepEvent ev;
  ev.first = static_cast<std::size_t>(uniform_index(gen, agents.size()));
  ev.second = static_cast<std::size_t>(uniform_index(gen, agents.size() - 1));
  if (ev.second >= ev.first) ++ev.second;
  ev.first_before = agents[ev.first].kind;
  ev.second_before = agents[ev.second].kind;

  bool mutated = false;
  for (std::size_t idx : {ev.first, ev.second}) {
    if (!bernoulli(gen, p.mu)) continue;
    const AgentKind to = p.enabled_kinds[uniform_index(gen, p.enabled_kinds.size())];
    if (p.mutation_gated && !adoption_allowed(agents[idx].kind, to, round_robin_fitness(world, idx, gen), p.price)) {
      continue;
    }
    convert(agents[idx], to, p.policy, gen);
    mutated = true;
  }
  if (mutated) {
    ev.outcome = StepOutcome::Mutation;
    ev.first_after = agents[ev.first].kind;
    ev.second_after = agents[ev.second].kind;
    return ev;
  }

  ev.f1 = round_robin_fitness(world, ev.first, gen);
  ev.f2 = round_robin_fitness(world, ev.second, gen);
  ev.first_after = ev.first_before;
  ev.second_after = ev.second_before;
  if (ev.first_before == ev.second_before) return ev;

  if (bernoulli(gen, fermi_probability(ev.f1, ev.f2, p.beta))) {
    if (!adoption_allowed(ev.first_before, ev.second_before, ev.f1, p.price)) {
      ev.outcome = StepOutcome::BlockedByCost;
      return ev;
    }
    convert(agents[ev.first], ev.second_before, p.policy, gen);
    ev.first_after = ev.second_before;
    ev.outcome = StepOutcome::Imitation;
  }
  return ev;
}

struct TraceRecord {
  std::uint64_t iteration = 0;
  KindCounts counts{};
  std::array<double, kKindCount> mean_fitness{};  // NaN for absent kinds
  double mean_fitness_total = 0.0;
  double gini = 0.0;  // NaN when the mean fitness is exactly zero
  bool negative_fitness = false;
};

struct SimulationTrace {
  std::uint64_t seed = 0;
  std::uint64_t params_hash = 0;
  std::vector<TraceRecord> records;
  std::optional<KindCounts> counts_at_90pct;  // composition at 0.9 N, for the settling check
};

// FNV-1a over a canonical rendering of every parameter.
inline std::uint64_t params_fingerprint(const WorldParams& p) {
  std::string s;
  char buf[64];
  auto add = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g;", v);
    s += buf;
  };
  add(static_cast<double>(p.n));
  add(static_cast<double>(p.game.m));
  add(p.game.alpha);
  add(p.game.r_bound);
  add(p.game.z_bound);
  add(p.policy.noise_base);
  add(p.policy.q_h_min);
  add(p.policy.q_h_max);
  add(p.policy.counterfactual_q.value_or(-1.0));
  add(p.policy.counterfactual_resimulate ? 1.0 : 0.0);
  add(p.policy.independent_prediction ? 1.0 : 0.0);
  add(p.beta);
  add(p.mu);
  add(p.price);
  add(static_cast<double>(p.iterations));
  for (auto k : p.enabled_kinds) add(static_cast<double>(index_of(k)));
  for (auto c : p.composition()) add(static_cast<double>(c));
  add(static_cast<double>(p.fitness_samples));
  add(static_cast<double>(p.seed));
  add(p.self_play ? 1.0 : 0.0);
  add(p.mutation_gated ? 1.0 : 0.0);
  add(p.bystander_ledgers ? 1.0 : 0.0);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Snapshot of the population with fresh census fitness. Uses its own stream
// so recording never perturbs the dynamics.
inline TraceRecord measure(const World& world, std::uint64_t tag) {
  TraceRecord rec;
  rec.iteration = world.iteration();
  rec.counts = world.counts();
  Engine gen = derive_engine(world.params().seed, tag);
  const std::vector<double> fitness = census_fitness(world.agents(), world.params(), gen);
  std::array<double, kKindCount> sums{};
  double total = 0.0;
  for (std::size_t i = 0; i < fitness.size(); ++i) {
    sums[index_of(world.agents()[i].kind)] += fitness[i];
    total += fitness[i];
  }
  for (std::size_t k = 0; k < kKindCount; ++k) {
    rec.mean_fitness[k] = rec.counts[k] > 0 ? sums[k] / static_cast<double>(rec.counts[k])
                                            : std::numeric_limits<double>::quiet_NaN();
  }
  rec.mean_fitness_total = total / static_cast<double>(fitness.size());
  try {
    rec.gini = gini(fitness);
  } catch (const std::domain_error&) {
    rec.gini = std::numeric_limits<double>::quiet_NaN();
  }
  rec.negative_fitness = has_negative(fitness);
  return rec;
}

// Runs params.iterations steps from the initial composition, recording the
// iteration-0 state, every `record_every` iterations, and the final state.
inline SimulationTrace run_simulation(const WorldParams& params, std::uint64_t record_every) {
  if (record_every == 0) throw std::invalid_argument("record_every must be positive");
  World world(params);
  SimulationTrace trace;
  trace.seed = params.seed;
  trace.params_hash = params_fingerprint(params);
  constexpr std::uint64_t kMeasureTag = 0x6d65617375726500ULL;  // "measure"
  trace.records.push_back(measure(world, kMeasureTag));
  const std::uint64_t settle_mark = (params.iterations * 9 + 9) / 10;
  if (settle_mark == 0) trace.counts_at_90pct = world.counts();
  for (std::uint64_t t = 1; t <= params.iterations; ++t) {
    step(world);
    if (t == settle_mark) trace.counts_at_90pct = world.counts();
    if (t % record_every == 0 || t == params.iterations) trace.records.push_back(measure(world, kMeasureTag + t));
  }
  return trace;
}

}  // namespace normdyn
