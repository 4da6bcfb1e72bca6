#include "distopt/errors.hpp"
#include "distopt/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace distopt;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool allow_nonstandard = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config file (key = value)")->required();
  cmd->add_option("--seed", c.seed, "override master_seed");
  cmd->add_option("--out", c.out, "override output path");
  cmd->add_flag("--allow-nonstandard-steps", c.allow_nonstandard,
                "permit step sizes outside the square-summable family");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg;
  if (c.allow_nonstandard) {
    // The flag must be visible while the file is validated.
    std::ifstream in(c.config);
    if (!in) throw ConfigError("cannot open config file '" + c.config + "'");
    std::stringstream ss;
    ss << in.rdbuf() << "\nallow_nonstandard_steps = true\n";
    cfg = parse_config_text(ss.str());
  } else {
    cfg = parse_config(c.config);
  }
  if (c.seed) cfg.master_seed = *c.seed;
  if (!c.out.empty()) cfg.output = c.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed penalty-based constrained optimization simulator"};
  app.require_subcommand(1);

  Common run_opts, validate_opts, oracle_opts, sweep_opts;
  auto* run_cmd = app.add_subcommand("run", "simulate and write the metrics CSV");
  add_common(run_cmd, run_opts);
  auto* validate_cmd = app.add_subcommand("validate", "check the standing assumptions");
  add_common(validate_cmd, validate_opts);
  auto* oracle_cmd = app.add_subcommand("oracle", "compute the centralized reference optimum");
  add_common(oracle_cmd, oracle_opts);
  auto* sweep_cmd = app.add_subcommand("sweep", "repeat runs over one parameter axis");
  add_common(sweep_cmd, sweep_opts);
  std::string axis;
  std::vector<std::string> values;
  sweep_cmd->add_option("--axis", axis, "mu | gamma0 | alpha | noise_std | s_i | N | seed")->required();
  sweep_cmd->add_option("--values", values, "comma-separated values")->required()->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(load(run_opts), std::cout);
    if (*validate_cmd) return cmd_validate(load(validate_opts), std::cout);
    if (*oracle_cmd) return cmd_oracle(load(oracle_opts), std::cout);
    if (*sweep_cmd) return cmd_sweep(load(sweep_opts), axis, values, std::cout);
  } catch (const ConfigParseError& e) {
    for (const auto& msg : e.errors()) std::cerr << "config error: " << msg << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
