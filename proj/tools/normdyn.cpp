#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "normdyn/config.hpp"
#include "normdyn/presets.hpp"

namespace {

struct CommonFlags {
  std::optional<std::string> config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
  bool print_config = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", f.sets, "override a key, e.g. --set world.alpha=1.0 (repeatable)");
  cmd->add_option("--seed", f.seed, "base seed; run r uses seed + r (fallback: NORMDYN_SEED)");
  cmd->add_option("--runs", f.runs, "number of seeds");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--jobs", f.jobs, "worker threads");
  cmd->add_flag("--print-config", f.print_config, "print the resolved configuration and exit");
}

normdyn::ExperimentConfig resolve(const CommonFlags& f, const std::string& preset) {
  using normdyn::Assignment;
  std::vector<Assignment> document;
  if (const char* env = std::getenv("NORMDYN_SEED")) {
    document.push_back({"experiment.seed_base", env, "NORMDYN_SEED"});
  }
  if (f.config) {
    std::ifstream in(*f.config);
    if (!in) throw normdyn::ConfigError("cannot read config file '" + *f.config + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    for (auto& a : normdyn::parse_assignments(ss.str(), *f.config)) document.push_back(std::move(a));
  }
  std::vector<Assignment> overrides;
  for (std::size_t i = 0; i < f.sets.size(); ++i) overrides.push_back(normdyn::parse_override(f.sets[i], i));
  if (f.seed) overrides.push_back({"experiment.seed_base", std::to_string(*f.seed), "--seed"});
  if (f.runs) overrides.push_back({"experiment.runs", std::to_string(*f.runs), "--runs"});
  if (f.out) overrides.push_back({"experiment.out", *f.out, "--out"});
  if (f.jobs) overrides.push_back({"experiment.jobs", std::to_string(*f.jobs), "--jobs"});
  return normdyn::resolve_config(document, overrides, preset);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"normdyn: evolution of A.I. decision norms in a population of humans"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* simulate = app.add_subcommand("simulate", "evolve a mixed population (the custom preset)");
  auto* gradient = app.add_subcommand("gradient", "imitation gradient for gradient.kind over gradient.k_grid");
  auto* paroch = app.add_subcommand("parochial", "parochial prisoner's dilemma analysis");
  auto* preset = app.add_subcommand("preset", "run a named experiment preset");
  std::string preset_name;
  preset->add_option("name", preset_name, "fig1, fig2, fig3, fig4, fig5, table1, table2 or custom")->required();
  for (auto* cmd : {simulate, gradient, paroch, preset}) add_common(cmd, flags);

  CLI11_PARSE(app, argc, argv);

  std::string name;
  if (simulate->parsed()) name = "custom";
  if (gradient->parsed()) name = "gradient";
  if (paroch->parsed()) name = "parochial";
  if (preset->parsed()) name = preset_name;

  try {
    const normdyn::ExperimentConfig cfg = resolve(flags, name);
    if (flags.print_config) {
      for (const auto& line : normdyn::config_lines(cfg)) std::cout << line << '\n';
      return 0;
    }
    std::cerr << "normdyn: running " << cfg.preset << " (" << cfg.runs << " runs, seeds from " << cfg.seed_base
              << ")\n";
    const auto files = normdyn::run_preset(cfg, &std::cerr);
    for (const auto& f : files) std::cout << f.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "normdyn: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
