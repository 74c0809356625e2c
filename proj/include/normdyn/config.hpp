#pragma once

// Experiment configuration: a flat `key = value` document with dotted keys,
// command-line overrides, preset defaults, and a canonical echo of the
// resolved values for output headers.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "normdyn/dynamics.hpp"
#include "normdyn/metrics.hpp"
#include "normdyn/parochial.hpp"

namespace normdyn {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The last two back the `gradient` and `parochial` subcommands.
inline constexpr std::array<std::string_view, 10> kPresetNames = {
    "fig1", "fig2", "fig3", "fig4", "fig5", "table1", "table2", "custom", "gradient", "parochial"};

struct GradientSettings {
  AgentKind kind = AgentKind::HConscious;
  std::vector<std::size_t> k_grid;  // empty: 21 evenly spaced points over [0, n]
  std::size_t samples = 50;
};

struct ParochialSettings {
  std::vector<double> b_values{0.5, 0.67, 0.83, 1.0};
  double n = 0.2;
  std::vector<double> c_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  // Single point reported in the summary.
  double b = 0.5;
  double n1 = 0.1;
  double n2 = 0.2;
  double c = 0.5;
  parochial::PdMatrix pd = parochial::kDefaultPd;
};

struct ExperimentConfig {
  std::string preset = "custom";
  WorldParams world;
  std::size_t runs = 20;
  std::uint64_t seed_base = 1;
  std::string out = "out";
  std::uint64_t record_every = 500;
  std::size_t jobs = 1;
  GradientSettings gradient;
  std::vector<double> fig3_shares{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  ParochialSettings parochial;

  std::vector<std::size_t> k_grid() const {
    return gradient.k_grid.empty() ? even_grid(world.n, 20) : gradient.k_grid;
  }
};

namespace config_detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double to_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    throw ConfigError("expected a real number, got '" + std::string(s) + "'");
  }
  return v;
}

inline std::uint64_t to_uint(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

inline bool to_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("expected a boolean, got '" + std::string(s) + "'");
}

inline AgentKind to_kind(std::string_view s) {
  if (auto k = parse_kind(trim(s))) return *k;
  throw ConfigError("unknown agent kind '" + std::string(trim(s)) + "'");
}

inline std::vector<double> to_doubles(std::string_view s) {
  std::vector<double> out;
  for (auto part : split(s, ',')) out.push_back(to_double(part));
  return out;
}

inline std::string fmt(double v) {
  if (v == -std::numeric_limits<double>::infinity()) return "free";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class T, class F>
std::string join(const std::vector<T>& v, F&& f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += f(v[i]);
  }
  return out;
}

inline void require(bool ok, const char* message) {
  if (!ok) throw ConfigError(message);
}

struct Key {
  std::string name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

inline const std::vector<Key>& keys() {
  using C = ExperimentConfig;
  using V = std::string_view;
  static const std::vector<Key> table = {
      {"experiment.preset",
       [](C& c, V v) {
         const std::string name(trim(v));
         bool ok = false;
         for (auto p : kPresetNames) ok = ok || p == name;
         require(ok, "unknown preset");
         c.preset = name;
       },
       [](const C& c) { return c.preset; }},
      {"experiment.runs",
       [](C& c, V v) {
         c.runs = to_uint(v);
         require(c.runs >= 1, "runs must be at least 1");
       },
       [](const C& c) { return std::to_string(c.runs); }},
      {"experiment.seed_base", [](C& c, V v) { c.seed_base = to_uint(v); },
       [](const C& c) { return std::to_string(c.seed_base); }},
      {"experiment.out", [](C& c, V v) { c.out = std::string(trim(v)); }, [](const C& c) { return c.out; }},
      {"experiment.record_every",
       [](C& c, V v) {
         c.record_every = to_uint(v);
         require(c.record_every >= 1, "record_every must be at least 1");
       },
       [](const C& c) { return std::to_string(c.record_every); }},
      {"experiment.jobs",
       [](C& c, V v) {
         c.jobs = to_uint(v);
         require(c.jobs >= 1, "jobs must be at least 1");
       },
       [](const C& c) { return std::to_string(c.jobs); }},

      {"world.n",
       [](C& c, V v) {
         c.world.n = to_uint(v);
         require(c.world.n >= 2, "n must be at least 2");
       },
       [](const C& c) { return std::to_string(c.world.n); }},
      {"world.m",
       [](C& c, V v) {
         c.world.game.m = to_uint(v);
         require(c.world.game.m >= 2 && c.world.game.m <= kMaxActions, "m must lie in [2,16]");
       },
       [](const C& c) { return std::to_string(c.world.game.m); }},
      {"world.alpha", [](C& c, V v) { c.world.game.alpha = to_double(v); },
       [](const C& c) { return fmt(c.world.game.alpha); }},
      {"world.r_bound",
       [](C& c, V v) {
         c.world.game.r_bound = to_double(v);
         require(c.world.game.r_bound > 0.0, "r_bound must be positive");
       },
       [](const C& c) { return fmt(c.world.game.r_bound); }},
      {"world.z_bound",
       [](C& c, V v) {
         c.world.game.z_bound = to_double(v);
         require(c.world.game.z_bound >= 0.0, "z_bound must be non-negative");
       },
       [](const C& c) { return fmt(c.world.game.z_bound); }},
      {"world.beta",
       [](C& c, V v) {
         c.world.beta = to_double(v);
         require(c.world.beta > 0.0, "beta must be positive");
       },
       [](const C& c) { return fmt(c.world.beta); }},
      {"world.mu",
       [](C& c, V v) {
         c.world.mu = to_double(v);
         require(c.world.mu >= 0.0 && c.world.mu <= 1.0, "mu must lie in [0,1]");
       },
       [](const C& c) { return fmt(c.world.mu); }},
      {"world.price",
       [](C& c, V v) { c.world.price = trim(v) == "free" ? kFreePrice : to_double(v); },
       [](const C& c) { return fmt(c.world.price); }},
      {"world.q_h_min",
       [](C& c, V v) {
         c.world.policy.q_h_min = to_double(v);
         require(c.world.policy.q_h_min >= 0.0, "q_h_min must be non-negative");
       },
       [](const C& c) { return fmt(c.world.policy.q_h_min); }},
      {"world.q_h_max", [](C& c, V v) { c.world.policy.q_h_max = to_double(v); },
       [](const C& c) { return fmt(c.world.policy.q_h_max); }},
      {"world.noise_base",
       [](C& c, V v) {
         c.world.policy.noise_base = to_double(v);
         require(c.world.policy.noise_base > 0.0, "noise_base must be positive");
       },
       [](const C& c) { return fmt(c.world.policy.noise_base); }},
      {"world.iterations", [](C& c, V v) { c.world.iterations = to_uint(v); },
       [](const C& c) { return std::to_string(c.world.iterations); }},
      {"world.kinds",
       [](C& c, V v) {
         std::vector<AgentKind> kinds;
         for (auto part : split(v, ',')) kinds.push_back(to_kind(part));
         c.world.enabled_kinds = kinds;
         require(c.world.enabled(AgentKind::Human), "kinds must include human");
       },
       [](const C& c) { return join(c.world.enabled_kinds, [](AgentKind k) { return std::string(to_string(k)); }); }},
      {"world.composition",
       [](C& c, V v) {
         if (trim(v) == "default") {
           c.world.initial_composition.reset();
           return;
         }
         KindCounts counts{};
         for (auto part : split(v, ',')) {
           const auto colon = part.find(':');
           require(colon != std::string_view::npos, "composition entries look like kind:count");
           counts[index_of(to_kind(part.substr(0, colon)))] += to_uint(part.substr(colon + 1));
         }
         c.world.initial_composition = counts;
       },
       [](const C& c) {
         if (!c.world.initial_composition) return std::string("default");
         std::string out;
         for (auto k : kAllKinds) {
           const auto n = (*c.world.initial_composition)[index_of(k)];
           if (n == 0) continue;
           if (!out.empty()) out += ",";
           out += std::string(to_string(k)) + ":" + std::to_string(n);
         }
         return out;
       }},
      {"world.fitness_samples",
       [](C& c, V v) {
         c.world.fitness_samples = to_uint(v);
         require(c.world.fitness_samples >= 1, "fitness_samples must be at least 1");
       },
       [](const C& c) { return std::to_string(c.world.fitness_samples); }},
      {"world.self_play", [](C& c, V v) { c.world.self_play = to_bool(v); },
       [](const C& c) { return std::string(c.world.self_play ? "true" : "false"); }},
      {"world.mutation_gated", [](C& c, V v) { c.world.mutation_gated = to_bool(v); },
       [](const C& c) { return std::string(c.world.mutation_gated ? "true" : "false"); }},
      {"world.bystander_ledgers", [](C& c, V v) { c.world.bystander_ledgers = to_bool(v); },
       [](const C& c) { return std::string(c.world.bystander_ledgers ? "true" : "false"); }},
      {"world.independent_prediction", [](C& c, V v) { c.world.policy.independent_prediction = to_bool(v); },
       [](const C& c) { return std::string(c.world.policy.independent_prediction ? "true" : "false"); }},
      {"world.counterfactual_q",
       [](C& c, V v) {
         if (trim(v) == "random") {
           c.world.policy.counterfactual_q.reset();
         } else {
           c.world.policy.counterfactual_q = to_double(v);
         }
       },
       [](const C& c) {
         return c.world.policy.counterfactual_q ? fmt(*c.world.policy.counterfactual_q) : std::string("random");
       }},
      {"world.counterfactual_resimulate",
       [](C& c, V v) { c.world.policy.counterfactual_resimulate = to_bool(v); },
       [](const C& c) { return std::string(c.world.policy.counterfactual_resimulate ? "true" : "false"); }},

      {"gradient.kind",
       [](C& c, V v) {
         c.gradient.kind = to_kind(v);
         require(is_ai(c.gradient.kind), "gradient.kind must be an A.I. kind");
       },
       [](const C& c) { return std::string(to_string(c.gradient.kind)); }},
      {"gradient.k_grid",
       [](C& c, V v) {
         c.gradient.k_grid.clear();
         if (trim(v) == "auto") return;
         for (auto part : split(v, ',')) c.gradient.k_grid.push_back(to_uint(part));
       },
       [](const C& c) {
         if (c.gradient.k_grid.empty()) return std::string("auto");
         return join(c.gradient.k_grid, [](std::size_t k) { return std::to_string(k); });
       }},
      {"gradient.samples",
       [](C& c, V v) {
         c.gradient.samples = to_uint(v);
         require(c.gradient.samples >= 1, "gradient.samples must be at least 1");
       },
       [](const C& c) { return std::to_string(c.gradient.samples); }},
      {"fig3.shares",
       [](C& c, V v) {
         c.fig3_shares = to_doubles(v);
         for (double s : c.fig3_shares) require(s >= 0.0 && s <= 1.0, "fig3.shares must lie in [0,1]");
       },
       [](const C& c) { return join(c.fig3_shares, fmt); }},

      {"parochial.b_values", [](C& c, V v) { c.parochial.b_values = to_doubles(v); },
       [](const C& c) { return join(c.parochial.b_values, fmt); }},
      {"parochial.n", [](C& c, V v) { c.parochial.n = to_double(v); },
       [](const C& c) { return fmt(c.parochial.n); }},
      {"parochial.c_grid", [](C& c, V v) { c.parochial.c_grid = to_doubles(v); },
       [](const C& c) { return join(c.parochial.c_grid, fmt); }},
      {"parochial.b", [](C& c, V v) { c.parochial.b = to_double(v); },
       [](const C& c) { return fmt(c.parochial.b); }},
      {"parochial.n1", [](C& c, V v) { c.parochial.n1 = to_double(v); },
       [](const C& c) { return fmt(c.parochial.n1); }},
      {"parochial.n2", [](C& c, V v) { c.parochial.n2 = to_double(v); },
       [](const C& c) { return fmt(c.parochial.n2); }},
      {"parochial.c", [](C& c, V v) { c.parochial.c = to_double(v); },
       [](const C& c) { return fmt(c.parochial.c); }},
      {"parochial.pd",
       [](C& c, V v) {
         const auto vals = to_doubles(v);
         require(vals.size() == 4, "parochial.pd takes four values R,S,T,P");
         c.parochial.pd = {{{vals[0], vals[1]}, {vals[2], vals[3]}}};
       },
       [](const C& c) {
         const auto& pd = c.parochial.pd;
         return fmt(pd[0][0]) + "," + fmt(pd[0][1]) + "," + fmt(pd[1][0]) + "," + fmt(pd[1][1]);
       }},
  };
  return table;
}

inline const Key* find_key(std::string_view name) {
  for (const auto& k : keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

}  // namespace config_detail

// One `key = value` assignment and where it came from, for diagnostics.
struct Assignment {
  std::string key;
  std::string value;
  std::string origin;  // e.g. "run.cfg:12" or "--set #1"
};

// Parses a document. Blank lines and lines starting with '#' are ignored.
inline std::vector<Assignment> parse_assignments(std::string_view text, const std::string& source) {
  std::vector<Assignment> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto raw = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    const auto line = config_detail::trim(raw);
    if (!line.empty() && line.front() != '#') {
      const auto eq = line.find('=');
      const std::string origin = source + ":" + std::to_string(line_no);
      if (eq == std::string_view::npos) throw ConfigError(origin + ": expected 'key = value'");
      out.push_back({std::string(config_detail::trim(line.substr(0, eq))),
                     std::string(config_detail::trim(line.substr(eq + 1))), origin});
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

inline Assignment parse_override(std::string_view text, std::size_t index) {
  const std::string origin = "--set #" + std::to_string(index + 1);
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError(origin + ": expected key=value");
  return {std::string(config_detail::trim(text.substr(0, eq))), std::string(config_detail::trim(text.substr(eq + 1))),
          origin};
}

// Paper settings each preset starts from, before user assignments.
inline void apply_preset_defaults(ExperimentConfig& cfg) {
  const std::string& p = cfg.preset;
  if (p == "fig1" || p == "fig2" || p == "table2" || p == "fig3") {
    cfg.world.price = 37.0;
  }
  if (p == "fig1") cfg.world.iterations = 20000;
  if (p == "fig4") {
    cfg.world.price = kFreePrice;
    cfg.world.iterations = 30000;
  }
}

inline void apply(ExperimentConfig& cfg, const Assignment& a) {
  const auto* key = config_detail::find_key(a.key);
  if (!key) throw ConfigError(a.origin + ": unknown key '" + a.key + "'");
  try {
    key->set(cfg, a.value);
  } catch (const ConfigError& e) {
    throw ConfigError(a.origin + ": " + a.key + ": " + e.what());
  }
}

// Resolves defaults < preset defaults < document < overrides. `preset`, when
// given, takes precedence over any experiment.preset assignment.
inline ExperimentConfig resolve_config(const std::vector<Assignment>& document,
                                       const std::vector<Assignment>& overrides,
                                       std::optional<std::string> preset = std::nullopt) {
  ExperimentConfig probe;
  for (const auto& a : document) {
    if (a.key == "experiment.preset") apply(probe, a);
  }
  for (const auto& a : overrides) {
    if (a.key == "experiment.preset") apply(probe, a);
  }
  if (preset) apply(probe, {"experiment.preset", *preset, "command line"});

  ExperimentConfig cfg;
  cfg.preset = probe.preset;
  apply_preset_defaults(cfg);
  for (const auto& a : document) apply(cfg, a);
  for (const auto& a : overrides) apply(cfg, a);
  cfg.preset = probe.preset;
  try {
    cfg.world.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  for (auto k : cfg.gradient.k_grid) {
    if (k > cfg.world.n) throw ConfigError("gradient.k_grid: grid point outside [0, n]");
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::optional<std::string>& path,
                                    const std::vector<std::string>& overrides = {},
                                    std::optional<std::string> preset = std::nullopt) {
  std::vector<Assignment> document;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot read config file '" + *path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    document = parse_assignments(ss.str(), *path);
  }
  std::vector<Assignment> over;
  for (std::size_t i = 0; i < overrides.size(); ++i) over.push_back(parse_override(overrides[i], i));
  return resolve_config(document, over, std::move(preset));
}

// Canonical `key = value` rendering of every setting, in table order.
inline std::vector<std::string> config_lines(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& k : config_detail::keys()) out.push_back(k.name + " = " + k.get(cfg));
  return out;
}

inline std::uint64_t run_seed(const ExperimentConfig& cfg, std::size_t run) { return cfg.seed_base + run; }

}  // namespace normdyn
