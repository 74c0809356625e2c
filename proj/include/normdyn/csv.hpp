#pragma once

// CSV writers and readers for traces, gradient curves and parochial grids.
// Numbers carry 9 significant digits; a missing value is an empty field.
// Files open with '#' comment lines (resolved config, seeds).

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "normdyn/dynamics.hpp"
#include "normdyn/metrics.hpp"
#include "normdyn/parochial.hpp"

namespace normdyn {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline double parse_number(const std::string& field) {
  if (field.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(field, &used);
  if (used != field.size()) throw std::runtime_error("bad numeric field '" + field + "'");
  return v;
}

// One trace row with real-valued counts, so run averages share the schema.
struct TraceRow {
  double iteration = 0.0;
  std::array<double, kKindCount> counts{};
  std::array<double, kKindCount> fitness{};
  double fitness_total = 0.0;
  double gini = 0.0;
};

inline TraceRow to_row(const TraceRecord& r) {
  TraceRow row;
  row.iteration = static_cast<double>(r.iteration);
  for (std::size_t k = 0; k < kKindCount; ++k) {
    row.counts[k] = static_cast<double>(r.counts[k]);
    row.fitness[k] = r.mean_fitness[k];
  }
  row.fitness_total = r.mean_fitness_total;
  row.gini = r.gini;
  return row;
}

inline std::vector<TraceRow> to_rows(const SimulationTrace& t) {
  std::vector<TraceRow> rows;
  rows.reserve(t.records.size());
  for (const auto& r : t.records) rows.push_back(to_row(r));
  return rows;
}

inline std::string trace_header() {
  std::string h = "iteration";
  for (auto k : kAllKinds) h += ",count_" + std::string(to_string(k));
  for (auto k : kAllKinds) h += ",fit_" + std::string(to_string(k));
  return h + ",fit_total,gini";
}

inline void write_comments(std::ostream& os, const std::vector<std::string>& comments) {
  for (const auto& c : comments) os << "# " << c << '\n';
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows,
                            const std::vector<std::string>& comments = {}) {
  write_comments(os, comments);
  os << trace_header() << '\n';
  for (const auto& r : rows) {
    os << format_number(r.iteration);
    for (double c : r.counts) os << ',' << format_number(c);
    for (double f : r.fitness) os << ',' << format_number(f);
    os << ',' << format_number(r.fitness_total) << ',' << format_number(r.gini) << '\n';
  }
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::vector<TraceRow> read_trace_csv(std::istream& is) {
  std::vector<TraceRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != trace_header()) throw std::runtime_error("read_trace_csv: unexpected header");
      header_seen = true;
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != 3 + 2 * kKindCount) throw std::runtime_error("read_trace_csv: wrong field count");
    TraceRow r;
    r.iteration = parse_number(f[0]);
    for (std::size_t k = 0; k < kKindCount; ++k) {
      r.counts[k] = parse_number(f[1 + k]);
      r.fitness[k] = parse_number(f[1 + kKindCount + k]);
    }
    r.fitness_total = parse_number(f[1 + 2 * kKindCount]);
    r.gini = parse_number(f[2 + 2 * kKindCount]);
    rows.push_back(r);
  }
  if (!header_seen) throw std::runtime_error("read_trace_csv: missing header");
  return rows;
}

inline void write_gradient_csv(std::ostream& os, const GradientCurve& curve,
                               const std::vector<std::string>& comments = {}) {
  write_comments(os, comments);
  os << "k,frac_ai,f_h,f_ai,t_plus,t_minus,g\n";
  for (const auto& p : curve.points) {
    os << p.k << ',' << format_number(p.frac_ai()) << ',' << format_number(p.f_h_mean) << ','
       << format_number(p.f_ai_mean) << ',' << format_number(p.t_plus) << ',' << format_number(p.t_minus) << ','
       << format_number(p.g) << '\n';
  }
}

inline void write_parochial_csv(std::ostream& os, const std::vector<parochial::CurvePoint>& points,
                                const std::vector<std::string>& comments = {}) {
  write_comments(os, comments);
  os << "b,c,gain_p1,gain_p2,difference\n";
  for (const auto& p : points) {
    os << format_number(p.b) << ',' << format_number(p.c) << ',' << format_number(p.gain_p1) << ','
       << format_number(p.gain_p2) << ',' << format_number(p.difference) << '\n';
  }
}

// Element-wise mean and standard deviation (n-1 denominator) of traces with
// identical record iterations; NaN entries are skipped per cell.
struct TraceAggregate {
  std::vector<TraceRow> mean;
  std::vector<TraceRow> sd;
};

inline TraceAggregate aggregate_traces(const std::vector<SimulationTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("aggregate_traces: no traces");
  const std::size_t len = traces.front().records.size();
  for (const auto& t : traces) {
    if (t.records.size() != len) throw std::invalid_argument("aggregate_traces: record counts differ");
  }
  TraceAggregate agg;
  agg.mean.resize(len);
  agg.sd.resize(len);
  auto reduce = [&](auto&& field, std::size_t i, double& mean, double& sd) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& t : traces) {
      const double v = field(t.records[i]);
      if (std::isnan(v)) continue;
      sum += v;
      ++n;
    }
    if (n == 0) {
      mean = sd = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    mean = sum / static_cast<double>(n);
    for (const auto& t : traces) {
      const double v = field(t.records[i]);
      if (!std::isnan(v)) sq += (v - mean) * (v - mean);
    }
    sd = n > 1 ? std::sqrt(sq / static_cast<double>(n - 1)) : 0.0;
  };
  for (std::size_t i = 0; i < len; ++i) {
    auto& m = agg.mean[i];
    auto& s = agg.sd[i];
    m.iteration = s.iteration = static_cast<double>(traces.front().records[i].iteration);
    for (std::size_t k = 0; k < kKindCount; ++k) {
      reduce([k](const TraceRecord& r) { return static_cast<double>(r.counts[k]); }, i, m.counts[k], s.counts[k]);
      reduce([k](const TraceRecord& r) { return r.mean_fitness[k]; }, i, m.fitness[k], s.fitness[k]);
    }
    reduce([](const TraceRecord& r) { return r.mean_fitness_total; }, i, m.fitness_total, s.fitness_total);
    reduce([](const TraceRecord& r) { return r.gini; }, i, m.gini, s.gini);
  }
  return agg;
}

}  // namespace normdyn
