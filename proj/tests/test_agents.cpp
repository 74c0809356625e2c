#include <gtest/gtest.h>

#include <cmath>

#include "normdyn/agents.hpp"
#include "normdyn/dynamics.hpp"

using namespace normdyn;

namespace {

PayoffBimatrix eq7() { return {{{0, 0}, {-3, 1}}, {{1, -5}, {-1, -1}}}; }

Individual agent(AgentKind k, double q = 10.0) {
  Individual a;
  a.kind = k;
  a.q = q;
  return a;
}

}  // namespace

TEST(Kinds, NamesRoundTrip) {
  for (auto k : kAllKinds) EXPECT_EQ(parse_kind(to_string(k)), k);
  EXPECT_EQ(parse_kind("utilitarian"), AgentKind::Utilitarian);
  EXPECT_FALSE(parse_kind("robot").has_value());
}

TEST(Individuals, ConstructionRespectsKindAndRange) {
  Engine gen(1);
  PolicyParams p;
  for (int i = 0; i < 1000; ++i) {
    const auto h = make_individual(AgentKind::Human, p, gen);
    ASSERT_GE(h.q, 0.0);
    ASSERT_LT(h.q, 5.0);
  }
  EXPECT_EQ(make_individual(AgentKind::Selfish, p, gen).q, 10.0);
}

TEST(Individuals, ConversionResetsQAndLedger) {
  Engine gen(2);
  PolicyParams p;
  Individual a = agent(AgentKind::HConscious);
  a.ledger = {3.0, 4.0};
  convert(a, AgentKind::HConscious, p, gen);
  EXPECT_EQ(a.ledger, (HConsciousLedger{3.0, 4.0}));
  convert(a, AgentKind::Human, p, gen);
  EXPECT_EQ(a.kind, AgentKind::Human);
  EXPECT_GE(a.q, 0.0);
  EXPECT_LT(a.q, 5.0);
  EXPECT_EQ(a.ledger, HConsciousLedger{});
  convert(a, AgentKind::Selfish, p, gen);
  EXPECT_EQ(a.q, 10.0);
}

TEST(Prediction, NoiselessHumanMatchesLadderOnTruth) {
  Engine gen(3);
  PolicyParams p;
  const auto h = agent(AgentKind::Human, 10.0);
  EXPECT_EQ(predict_human_action(eq7(), h, Seat::Two, p, gen).action, 1u);
  GenerationParams gp;
  for (int i = 0; i < 500; ++i) {
    const auto g = generate_payoff_matrix(gp, gen);
    ASSERT_EQ(predict_human_action(g, h, Seat::One, p, gen).action, select_nash_action(g, Seat::One));
  }
}

TEST(Prediction, RejectsNonHuman) {
  Engine gen(4);
  EXPECT_THROW(predict_human_action(eq7(), agent(AgentKind::Selfish), Seat::Two, PolicyParams{}, gen),
               std::invalid_argument);
}

TEST(Prediction, HumanPlaysThePredictedAction) {
  // The human's action inside an interaction is the ladder applied to the
  // very view the A.I. predicted from: replaying the stream reproduces it.
  PolicyParams p;
  GenerationParams gp;
  InteractionWorkspace ws;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Engine g0(seed);
    const auto truth = generate_payoff_matrix(gp, g0);
    const auto human = agent(AgentKind::Human, 2.0);
    Engine a(seed + 1000), b(seed + 1000);
    const auto pred = predict_human_action(truth, human, Seat::Two, p, a);
    const auto out = resolve_interaction(agent(AgentKind::Selfish), human, truth, p, b, ws);
    ASSERT_EQ(out.actions.a2, pred.action);
  }
}

TEST(Norms, PaperExampleResponses) {
  const auto g = eq7();
  EXPECT_EQ(act_versus_human(agent(AgentKind::Selfish), Seat::One, g, 0), 1u);
  EXPECT_EQ(act_versus_human(agent(AgentKind::NashEQ), Seat::One, g, 0), 1u);
  EXPECT_EQ(act_versus_ai(AgentKind::NashEQ, Seat::One, g), 1u);
  EXPECT_EQ(act_versus_ai(AgentKind::Utilitarian, Seat::One, g), 0u);
  EXPECT_EQ(act_versus_ai(AgentKind::Utilitarian, Seat::Two, g), 0u);
}

TEST(Norms, HConsciousBranches) {
  const auto g = eq7();
  Individual hc = agent(AgentKind::HConscious);
  // Fresh ledger: 0 >= 0, self-positive set {1}.
  EXPECT_EQ(act_hconscious(hc, Seat::One, g, 0), 1u);
  // U < E: no action is positive for the human in column 0, so the
  // utilitarian fallback picks the larger column sum.
  hc.ledger = {0.0, 1.0};
  EXPECT_EQ(act_hconscious(hc, Seat::One, g, 0), 0u);
}

TEST(Norms, DispatchValidatesPrediction) {
  Engine gen(5);
  PolicyParams p;
  const auto g = eq7();
  const auto h = agent(AgentKind::Human, 3.0);
  const auto s = agent(AgentKind::Selfish);
  EXPECT_THROW(act(s, Seat::One, g, h, std::nullopt, p, gen), std::invalid_argument);
  EXPECT_THROW(act(s, Seat::One, g, s, 0u, p, gen), std::invalid_argument);
  EXPECT_THROW(act(s, Seat::One, g, h, 5u, p, gen), std::out_of_range);
  EXPECT_EQ(act(s, Seat::One, g, h, 0u, p, gen), 1u);
  EXPECT_EQ(act(s, Seat::One, g, s, std::nullopt, p, gen), 1u);
}

TEST(Norms, PropertiesOnRandomGames) {
  Engine gen(6);
  GenerationParams gp;
  for (int rep = 0; rep < 3000; ++rep) {
    const auto g = generate_payoff_matrix(gp, gen);
    const std::size_t pred = uniform_index(gen, g.size());
    const Seat seat = rep % 2 ? Seat::One : Seat::Two;
    const std::size_t selfish = act_versus_human(agent(AgentKind::Selfish), seat, g, pred);
    for (auto k : {AgentKind::NashEQ, AgentKind::Utilitarian, AgentKind::HConscious}) {
      const std::size_t a = act_versus_human(agent(k), seat, g, pred);
      ASSERT_GE(g.own_payoff(seat, selfish, pred), g.own_payoff(seat, a, pred));
    }
    const auto joint = joint_sum_argmax(g);
    for (const auto& c : g.cells()) ASSERT_LE(c.u1 + c.u2, g(joint).u1 + g(joint).u2);

    // With U >= E and some strictly positive own option, HConscious never
    // takes a weakly negative one.
    const std::size_t hc = act_hconscious(agent(AgentKind::HConscious), seat, g, pred);
    bool any_positive = false;
    for (std::size_t a = 0; a < g.size(); ++a) any_positive = any_positive || g.own_payoff(seat, a, pred) > 0.0;
    if (any_positive) {
      ASSERT_GT(g.own_payoff(seat, hc, pred), 0.0);
    }
  }
}

TEST(Ledger, NoiselessCounterfactualIsNashOutcome) {
  Engine gen(7);
  PolicyParams p;
  p.counterfactual_q = 10.0;
  HConsciousLedger ledger;
  const auto human = agent(AgentKind::Human, 10.0);
  // Human in seat two plays 1; realized human payoff 1.5 is booked as is.
  hconscious_ledger_update(ledger, human, 1, 1.5, eq7(), Seat::One, p, gen);
  EXPECT_EQ(ledger.u_total, 1.5);
  EXPECT_EQ(ledger.e_total, -1.0);
}

TEST(Ledger, RealizedPayoffsAccumulate) {
  Engine gen(8);
  PolicyParams p;
  HConsciousLedger ledger;
  const auto human = agent(AgentKind::Human, 4.0);
  hconscious_ledger_update(ledger, human, 0, 2.0, eq7(), Seat::One, p, gen);
  hconscious_ledger_update(ledger, human, 1, -0.5, eq7(), Seat::One, p, gen);
  EXPECT_EQ(ledger.u_total, 1.5);
}

TEST(Ledger, HConsciousGapStaysBoundedWhileSelfishGapGrows) {
  // Same seeds for both norms: the selfish agent's human opponents fall ever
  // further behind their counterfactual, while HConscious steers U - E back
  // towards zero.
  const PolicyParams p;
  GenerationParams gp;
  auto run = [&](AgentKind kind, int steps) {
    Engine gen(9);
    InteractionWorkspace ws;
    Individual ai = agent(kind);
    Individual human = agent(AgentKind::Human, 0.0);
    HConsciousLedger shadow;  // same bookkeeping for any norm
    for (int i = 0; i < steps; ++i) {
      human.q = draw_human_q(p, gen);
      generate_payoff_matrix_into(gp, gen, ws.truth);
      ai.ledger = kind == AgentKind::HConscious ? shadow : HConsciousLedger{};
      const auto out = resolve_interaction(ai, human, ws.truth, p, gen, ws);
      hconscious_ledger_update(shadow, human, out.actions.a2, out.u2, ws.truth, Seat::One, p, gen);
    }
    return (shadow.u_total - shadow.e_total);
  };
  const double hc_1k = run(AgentKind::HConscious, 1000);
  const double hc_10k = run(AgentKind::HConscious, 10000);
  const double sf_1k = run(AgentKind::Selfish, 1000);
  const double sf_10k = run(AgentKind::Selfish, 10000);
  EXPECT_LT(std::abs(hc_10k) / 10000.0, 0.05);
  EXPECT_LT(std::abs(hc_10k), std::abs(hc_1k) + 50.0);
  EXPECT_LT(sf_10k, -0.5 * 10000.0 * 0.1);
  EXPECT_LT(sf_10k, 5.0 * sf_1k);
}
