#pragma once

// Preset runner: maps a resolved configuration to its computation and writes
// CSV files plus a JSON summary into the output directory. Files written by
// a failed run are removed.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "normdyn/config.hpp"
#include "normdyn/csv.hpp"
#include "normdyn/experiments.hpp"
#include "normdyn/parochial.hpp"

namespace normdyn {

class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) std::filesystem::remove(p, ec);
  }

  template <class Writer>
  void write(const std::string& name, Writer&& writer) {
    std::filesystem::create_directories(dir_);
    const auto path = dir_ / name;
    written_.push_back(path);
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    writer(os);
    os.flush();
    if (!os) throw std::runtime_error("error writing '" + path.string() + "'");
  }

  void commit() { committed_ = true; }
  const std::vector<std::filesystem::path>& files() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
  bool committed_ = false;
};

namespace preset_detail {

using nlohmann::json;

inline json to_json(const Stat& s) { return {{"mean", s.mean}, {"sd", s.sd}, {"n", s.n}}; }

inline json to_json(const MeasurementStats& m) {
  return {{"f_h", to_json(m.f_h)}, {"f_ai", to_json(m.f_ai)}, {"f_total", to_json(m.f_total)}, {"gini", to_json(m.gini)}};
}

inline json to_json(const ZeroCrossing& z) {
  return {{"k_lo", z.k_lo}, {"k_hi", z.k_hi}, {"k_star", z.k_star}, {"frac_star", z.frac_star}, {"stable", z.stable}};
}

inline json to_json(const GradientCurve& c) {
  json crossings = json::array();
  for (const auto& z : c.crossings) crossings.push_back(to_json(z));
  return {{"kind", to_string(c.ai_kind)}, {"crossings", crossings}};
}

inline std::vector<std::string> header(const ExperimentConfig& cfg) {
  std::vector<std::string> h = config_lines(cfg);
  std::string seeds = "seeds =";
  for (std::size_t r = 0; r < cfg.runs; ++r) seeds += " " + std::to_string(run_seed(cfg, r));
  h.push_back(seeds);
  return h;
}

inline json summary_base(const ExperimentConfig& cfg) {
  json config = json::object();
  for (const auto& line : config_lines(cfg)) {
    const auto eq = line.find(" = ");
    config[line.substr(0, eq)] = line.substr(eq + 3);
  }
  json seeds = json::array();
  for (std::size_t r = 0; r < cfg.runs; ++r) seeds.push_back(run_seed(cfg, r));
  return {{"preset", cfg.preset}, {"config", config}, {"seeds", seeds}};
}

inline BatchOptions batch(const ExperimentConfig& cfg, std::ostream* log) {
  BatchOptions o;
  o.runs = cfg.runs;
  o.seed_base = cfg.seed_base;
  o.jobs = cfg.jobs;
  o.progress = log;
  return o;
}

inline void run_evolution(const ExperimentConfig& cfg, OutputSet& out, std::ostream* log) {
  const auto hdr = header(cfg);
  const auto traces = simulate_batch(cfg.world, cfg.record_every, batch(cfg, log));
  for (std::size_t r = 0; r < traces.size(); ++r) {
    const std::string name = cfg.preset + "_seed" + std::to_string(traces[r].seed) + ".csv";
    out.write(name, [&](std::ostream& os) { write_trace_csv(os, to_rows(traces[r]), hdr); });
  }
  const TraceAggregate agg = aggregate_traces(traces);
  out.write(cfg.preset + "_mean.csv", [&](std::ostream& os) { write_trace_csv(os, agg.mean, hdr); });
  out.write(cfg.preset + "_sd.csv", [&](std::ostream& os) { write_trace_csv(os, agg.sd, hdr); });

  const FinalStateSummary fin = summarize_final(traces);
  json j = summary_base(cfg);
  json final_state = json::object();
  for (auto k : kAllKinds) {
    final_state[std::string(to_string(k))] = {{"share", to_json(fin.share[index_of(k)])},
                                              {"fitness", to_json(fin.fitness[index_of(k)])}};
  }
  final_state["fit_total"] = to_json(fin.fitness_total);
  final_state["gini"] = to_json(fin.gini);
  j["final"] = final_state;
  j["runs_changed_in_last_10pct"] = fin.runs_changed_in_tail;
  out.write(cfg.preset + "_summary.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  if (log) {
    *log << "composition changed during the last 10% of iterations in " << fin.runs_changed_in_tail << " of "
         << fin.runs << " runs\n";
  }
}

inline void run_gradients(const ExperimentConfig& cfg, const std::vector<AgentKind>& kinds, OutputSet& out,
                          std::ostream* log) {
  const auto hdr = header(cfg);
  json j = summary_base(cfg);
  j["curves"] = json::array();
  for (auto kind : kinds) {
    if (log) *log << "gradient " << to_string(kind) << "\n";
    const GradientCurve curve = mean_gradient_curve(kind, cfg.world, cfg.k_grid(), cfg.gradient.samples, batch(cfg, log));
    out.write(cfg.preset + "_" + std::string(to_string(kind)) + ".csv",
              [&](std::ostream& os) { write_gradient_csv(os, curve, hdr); });
    j["curves"].push_back(to_json(curve));
  }
  out.write(cfg.preset + "_summary.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

inline void run_table1(const ExperimentConfig& cfg, OutputSet& out, std::ostream* log) {
  const auto rows = homogeneous_table(cfg.world, batch(cfg, log));
  json j = summary_base(cfg);
  j["rows"] = json::array();
  out.write("table1.csv", [&](std::ostream& os) {
    write_comments(os, header(cfg));
    os << "population,fitness,fitness_sd,gini,gini_sd\n";
    for (const auto& r : rows) {
      os << to_string(r.kind) << ',' << format_number(r.fitness.mean) << ',' << format_number(r.fitness.sd) << ','
         << format_number(r.gini.mean) << ',' << format_number(r.gini.sd) << '\n';
      j["rows"].push_back({{"population", to_string(r.kind)}, {"fitness", to_json(r.fitness)}, {"gini", to_json(r.gini)}});
    }
  });
  out.write("table1_summary.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

inline void run_table2(const ExperimentConfig& cfg, OutputSet& out, std::ostream* log) {
  const auto hdr = header(cfg);
  json j = summary_base(cfg);
  j["rows"] = json::array();
  std::vector<EquilibriumRow> rows;
  for (auto kind : {AgentKind::NashEQ, AgentKind::Selfish, AgentKind::HConscious, AgentKind::Utilitarian}) {
    if (log) *log << "equilibrium " << to_string(kind) << "\n";
    const GradientCurve curve = mean_gradient_curve(kind, cfg.world, cfg.k_grid(), cfg.gradient.samples, batch(cfg, log));
    out.write("table2_gradient_" + std::string(to_string(kind)) + ".csv",
              [&](std::ostream& os) { write_gradient_csv(os, curve, hdr); });
    rows.push_back(equilibrium_at_crossing(curve, cfg.world, batch(cfg, nullptr)));
  }
  out.write("table2.csv", [&](std::ostream& os) {
    write_comments(os, hdr);
    os << "population,frac_ai,f_h,f_ai,f_total,gini\n";
    for (const auto& r : rows) {
      os << to_string(r.kind) << ',' << format_number(static_cast<double>(r.k) / static_cast<double>(cfg.world.n))
         << ',' << format_number(r.at.f_h.mean) << ',' << format_number(r.at.f_ai.mean) << ','
         << format_number(r.at.f_total.mean) << ',' << format_number(r.at.gini.mean) << '\n';
      json row = {{"population", to_string(r.kind)}, {"k", r.k}, {"measurement", to_json(r.at)}};
      row["crossing"] = r.crossing ? to_json(*r.crossing) : json(nullptr);
      j["rows"].push_back(row);
    }
  });
  out.write("table2_summary.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

inline void run_fig3(const ExperimentConfig& cfg, OutputSet& out, std::ostream* log) {
  const auto pts =
      share_sweep({AgentKind::Selfish, AgentKind::Utilitarian}, cfg.fig3_shares, cfg.world, batch(cfg, log));
  out.write("fig3.csv", [&](std::ostream& os) {
    write_comments(os, header(cfg));
    os << "kind,frac_ai,k,f_h,f_h_sd,f_ai,f_ai_sd,f_total,gini\n";
    for (const auto& p : pts) {
      os << to_string(p.kind) << ',' << format_number(p.share) << ',' << p.k << ',' << format_number(p.at.f_h.mean)
         << ',' << format_number(p.at.f_h.sd) << ',' << format_number(p.at.f_ai.mean) << ','
         << format_number(p.at.f_ai.sd) << ',' << format_number(p.at.f_total.mean) << ','
         << format_number(p.at.gini.mean) << '\n';
    }
  });
  json j = summary_base(cfg);
  const auto cross = sweep_crossover(pts, AgentKind::Selfish, AgentKind::Utilitarian);
  j["selfish_util_crossover"] = cross ? json(*cross) : json(nullptr);
  out.write("fig3_summary.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

inline void run_parochial(const ExperimentConfig& cfg, OutputSet& out) {
  const auto& pc = cfg.parochial;
  const auto pts = parochial::fig5_curves(pc.b_values, pc.n, pc.c_grid);
  const std::string stem = cfg.preset == "fig5" ? "fig5" : "parochial";
  out.write(stem + ".csv", [&](std::ostream& os) { write_parochial_csv(os, pts, config_lines(cfg)); });

  const parochial::ParochialParams point{pc.b, pc.n1, pc.n2, pc.c, pc.pd};
  point.validate();
  json payoffs = json::object();
  for (int a1 = 0; a1 < 2; ++a1) {
    for (int a2 = 0; a2 < 2; ++a2) {
      const std::string key = std::string(a1 ? "D" : "C") + (a2 ? "D" : "C");
      const auto ex = parochial::expected_payoffs(point, static_cast<parochial::Move>(a1),
                                                  static_cast<parochial::Move>(a2), parochial::Order::Exact);
      const auto fo = parochial::expected_payoffs(point, static_cast<parochial::Move>(a1),
                                                  static_cast<parochial::Move>(a2), parochial::Order::FirstOrder);
      payoffs[key] = {{"exact", {ex.u1, ex.u2}}, {"first_order", {fo.u1, fo.u2}}};
    }
  }
  const auto d = parochial::payoff_difference_matrix(pc.b, pc.n1, pc.n2);
  const auto cert = parochial::is_dd_nash(pc.b, pc.n1, pc.n2, pc.pd);
  const auto adv = parochial::ai_advantage(pc.b, pc.n1, pc.n2, pc.c, pc.pd);
  json j = json::object();
  j["config"] = summary_base(cfg)["config"];
  j["point"] = {{"b", pc.b}, {"n1", pc.n1}, {"n2", pc.n2}, {"c", pc.c}};
  j["expected_payoffs"] = payoffs;
  j["difference_matrix"] = {{"CC", d[0][0]}, {"CD", d[0][1]}, {"DC", d[1][0]}, {"DD", d[1][1]}};
  j["dd_nash"] = {{"is_nash", cert.is_nash}, {"margin_p1", cert.margin_p1}, {"margin_p2", cert.margin_p2}};
  j["advantage"] = {{"term_p1", adv.term_p1},
                    {"term_p2", adv.term_p2},
                    {"difference", adv.difference},
                    {"delta_u1", adv.delta_u1},
                    {"delta_u2", adv.delta_u2}};
  out.write(stem + "_summary.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

}  // namespace preset_detail

// Runs the configured preset and returns the files written.
inline std::vector<std::filesystem::path> run_preset(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
  OutputSet out(cfg.out);
  const std::string& p = cfg.preset;
  if (p == "fig1" || p == "fig4" || p == "custom") {
    preset_detail::run_evolution(cfg, out, log);
  } else if (p == "fig2") {
    preset_detail::run_gradients(
        cfg, {AgentKind::NashEQ, AgentKind::Selfish, AgentKind::Utilitarian, AgentKind::HConscious}, out, log);
  } else if (p == "gradient") {
    preset_detail::run_gradients(cfg, {cfg.gradient.kind}, out, log);
  } else if (p == "fig3") {
    preset_detail::run_fig3(cfg, out, log);
  } else if (p == "fig5" || p == "parochial") {
    preset_detail::run_parochial(cfg, out);
  } else if (p == "table1") {
    preset_detail::run_table1(cfg, out, log);
  } else if (p == "table2") {
    preset_detail::run_table2(cfg, out, log);
  } else {
    throw std::invalid_argument("unknown preset '" + p + "'");
  }
  out.commit();
  return out.files();
}

}  // namespace normdyn
