#pragma once

// Individuals and their decision norms: the human ladder on a noisy view,
// and the four A.I. norms on the true game.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "normdyn/game_core.hpp"
#include "normdyn/random.hpp"

namespace normdyn {

enum class AgentKind : std::uint8_t { Human, NashEQ, Selfish, Utilitarian, HConscious };

inline constexpr std::size_t kKindCount = 5;
inline constexpr std::array<AgentKind, kKindCount> kAllKinds = {
    AgentKind::Human, AgentKind::NashEQ, AgentKind::Selfish, AgentKind::Utilitarian,
    AgentKind::HConscious};

constexpr std::size_t index_of(AgentKind k) { return static_cast<std::size_t>(k); }
constexpr bool is_ai(AgentKind k) { return k != AgentKind::Human; }

// Short names used in config files and CSV column suffixes.
constexpr std::string_view to_string(AgentKind k) {
  switch (k) {
    case AgentKind::Human: return "human";
    case AgentKind::NashEQ: return "nasheq";
    case AgentKind::Selfish: return "selfish";
    case AgentKind::Utilitarian: return "util";
    case AgentKind::HConscious: return "hconscious";
  }
  return "?";
}

inline std::optional<AgentKind> parse_kind(std::string_view s) {
  for (auto k : kAllKinds) {
    if (s == to_string(k)) return k;
  }
  if (s == "utilitarian") return AgentKind::Utilitarian;
  if (s == "h") return AgentKind::Human;
  return std::nullopt;
}

// Running totals kept by an HConscious agent over its human opponents:
// realized payoff (U) and the payoff they would have had against a
// simulated human (E).
struct HConsciousLedger {
  double u_total = 0.0;
  double e_total = 0.0;
  friend bool operator==(const HConsciousLedger&, const HConsciousLedger&) = default;
};

struct Individual {
  AgentKind kind = AgentKind::Human;
  double q = 0.0;
  HConsciousLedger ledger;
  double fitness = 0.0;
};

struct PolicyParams {
  double noise_base = kDefaultNoiseBase;
  double q_h_min = 0.0;
  double q_h_max = 5.0;
  // Intelligence of the simulated human behind E; unset means a fresh
  // uniform draw from [q_h_min, q_h_max] per counterfactual.
  std::optional<double> counterfactual_q;
  // When set, the real human also re-draws its view in the counterfactual
  // instead of reusing the action it actually played.
  bool counterfactual_resimulate = false;
  // When set, the human plays on a second, independent view instead of the
  // one the A.I. predicted it from.
  bool independent_prediction = false;

  void validate() const {
    if (!(noise_base > 0.0)) throw std::invalid_argument("noise_base must be positive");
    if (!(q_h_min >= 0.0 && q_h_min <= q_h_max && q_h_max <= noise_base)) {
      throw std::invalid_argument("q_h range must satisfy 0 <= q_h_min <= q_h_max <= noise_base");
    }
    if (counterfactual_q && !(*counterfactual_q >= 0.0 && *counterfactual_q <= noise_base)) {
      throw std::invalid_argument("counterfactual_q must lie in [0, noise_base]");
    }
  }
};

template <BitGenerator64 G>
double draw_human_q(const PolicyParams& p, G& gen) {
  return uniform(gen, p.q_h_min, p.q_h_max);
}

template <BitGenerator64 G>
Individual make_individual(AgentKind kind, const PolicyParams& p, G& gen) {
  Individual ind;
  ind.kind = kind;
  ind.q = is_ai(kind) ? p.noise_base : draw_human_q(p, gen);
  return ind;
}

// Switches kind in place. Becoming an A.I. sets q to the noise-free
// ceiling; becoming human draws a fresh q. A change of kind clears the
// ledger; a no-op "switch" to the same kind leaves everything untouched.
template <BitGenerator64 G>
void convert(Individual& ind, AgentKind to, const PolicyParams& p, G& gen) {
  if (ind.kind == to) return;
  ind.kind = to;
  ind.q = is_ai(to) ? p.noise_base : draw_human_q(p, gen);
  ind.ledger = {};
}

// The human's view of this interaction and the action it will play.
struct HumanPrediction {
  std::size_t action = 0;
  PayoffBimatrix view;
};

// Draws the human's noisy view and applies its ladder. The same draw is what
// the human plays on in the interaction, so the prediction is exact.
template <BitGenerator64 G>
std::size_t predict_human_action_into(const PayoffBimatrix& truth, const Individual& human, Seat human_seat,
                                      const PolicyParams& p, G& gen, PayoffBimatrix& view) {
  if (human.kind != AgentKind::Human) {
    throw std::invalid_argument("predict_human_action: A.I. cannot predict a non-human opponent");
  }
  observe_noisy_into(truth, human.q, gen, view, p.noise_base);
  return select_nash_action(view, human_seat);
}

template <BitGenerator64 G>
HumanPrediction predict_human_action(const PayoffBimatrix& truth, const Individual& human, Seat human_seat,
                                     const PolicyParams& p, G& gen) {
  check_intelligence(human.q, p.noise_base);
  HumanPrediction out;
  out.action = predict_human_action_into(truth, human, human_seat, p, gen, out.view);
  return out;
}

namespace detail {

// argmax over own actions of own payoff (+ opponent payoff when `joint`),
// opponent action fixed; lowest index on ties. `filter` restricts the
// candidate set; returns nullopt when nothing passes.
template <class Filter>
std::optional<std::size_t> best_given_opponent(const PayoffBimatrix& g, Seat seat, std::size_t opp, bool joint,
                                               Filter&& filter) {
  std::optional<std::size_t> best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < g.size(); ++a) {
    if (!filter(a)) continue;
    double v = g.own_payoff(seat, a, opp);
    if (joint) v += g.opponent_payoff(seat, a, opp);
    if (!best || v > best_value) {
      best = a;
      best_value = v;
    }
  }
  return best;
}

inline std::size_t selfish_response(const PayoffBimatrix& g, Seat seat, std::size_t predicted) {
  return *best_given_opponent(g, seat, predicted, false, [](std::size_t) { return true; });
}

inline std::size_t utilitarian_response(const PayoffBimatrix& g, Seat seat, std::size_t predicted) {
  return *best_given_opponent(g, seat, predicted, true, [](std::size_t) { return true; });
}

}  // namespace detail

// HConscious choice against a human whose action is known. With U >= E it
// restricts itself to actions strictly positive for itself, otherwise to
// actions strictly positive for the human; within the set it maximises the
// joint payoff, and with an empty set it acts as the Utilitarian would.
inline std::size_t act_hconscious(const Individual& agent, Seat seat, const PayoffBimatrix& truth,
                                  std::size_t predicted) {
  const bool self_first = agent.ledger.u_total >= agent.ledger.e_total;
  auto positive = [&](std::size_t a) {
    const double v = self_first ? truth.own_payoff(seat, a, predicted) : truth.opponent_payoff(seat, a, predicted);
    return v > 0.0;
  };
  if (auto a = detail::best_given_opponent(truth, seat, predicted, true, positive)) return *a;
  return detail::utilitarian_response(truth, seat, predicted);
}

// A.I. decision when the opponent is another A.I.
inline std::size_t act_versus_ai(AgentKind kind, Seat seat, const PayoffBimatrix& truth) {
  if (kind == AgentKind::Utilitarian) {
    const JointAction j = joint_sum_argmax(truth);
    return seat == Seat::One ? j.a1 : j.a2;
  }
  return select_nash_action(truth, seat);
}

// A.I. decision against a human whose action is known.
inline std::size_t act_versus_human(const Individual& agent, Seat seat, const PayoffBimatrix& truth,
                                    std::size_t predicted) {
  switch (agent.kind) {
    case AgentKind::NashEQ: return select_nash_action(truth, seat);
    case AgentKind::Selfish: return detail::selfish_response(truth, seat, predicted);
    case AgentKind::Utilitarian: return detail::utilitarian_response(truth, seat, predicted);
    case AgentKind::HConscious: return act_hconscious(agent, seat, truth, predicted);
    case AgentKind::Human: break;
  }
  throw std::invalid_argument("act_versus_human: agent is not an A.I.");
}

// Full dispatch for a single agent. `predicted` must be supplied exactly when
// an A.I. faces a human. A human agent draws its own fresh noisy view; when
// the opponent is an A.I. that already predicted it, use the prediction's
// action instead of calling this.
template <BitGenerator64 G>
std::size_t act(const Individual& agent, Seat seat, const PayoffBimatrix& truth, const Individual& opponent,
                std::optional<std::size_t> predicted, const PolicyParams& p, G& gen) {
  const bool needs_prediction = is_ai(agent.kind) && opponent.kind == AgentKind::Human;
  if (needs_prediction && !predicted) throw std::invalid_argument("act: A.I. facing a human needs a prediction");
  if (!needs_prediction && predicted) throw std::invalid_argument("act: prediction only applies to A.I. versus human");
  if (predicted && *predicted >= truth.size()) throw std::out_of_range("act: predicted action out of range");

  if (agent.kind == AgentKind::Human) {
    check_intelligence(agent.q, p.noise_base);
    PayoffBimatrix view;
    observe_noisy_into(truth, agent.q, gen, view, p.noise_base);
    return select_nash_action(view, seat);
  }
  if (opponent.kind == AgentKind::Human) return act_versus_human(agent, seat, truth, *predicted);
  return act_versus_ai(agent.kind, seat, truth);
}

// Books an interaction of an HConscious agent (sitting in `ai_seat`) against
// `human`: U grows by the realized human payoff, E by what the human would
// have earned against a simulated human in the agent's seat.
template <BitGenerator64 G>
void hconscious_ledger_update(HConsciousLedger& ledger, const Individual& human, std::size_t human_action,
                              double human_payoff_realized, const PayoffBimatrix& truth, Seat ai_seat,
                              const PolicyParams& p, G& gen, PayoffBimatrix& scratch) {
  ledger.u_total += human_payoff_realized;
  const double sim_q = p.counterfactual_q ? *p.counterfactual_q : draw_human_q(p, gen);
  observe_noisy_into(truth, sim_q, gen, scratch, p.noise_base);
  const std::size_t sim_action = select_nash_action(scratch, ai_seat);
  std::size_t real_action = human_action;
  if (p.counterfactual_resimulate) {
    observe_noisy_into(truth, human.q, gen, scratch, p.noise_base);
    real_action = select_nash_action(scratch, other(ai_seat));
  }
  ledger.e_total += truth.opponent_payoff(ai_seat, sim_action, real_action);
}

template <BitGenerator64 G>
void hconscious_ledger_update(HConsciousLedger& ledger, const Individual& human, std::size_t human_action,
                              double human_payoff_realized, const PayoffBimatrix& truth, Seat ai_seat,
                              const PolicyParams& p, G& gen) {
  PayoffBimatrix scratch(truth.size());
  hconscious_ledger_update(ledger, human, human_action, human_payoff_realized, truth, ai_seat, p, gen, scratch);
}

}  // namespace normdyn
