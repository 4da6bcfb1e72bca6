#pragma once

#include "distopt/engine.hpp"
#include "distopt/errors.hpp"
#include "distopt/library.hpp"
#include "distopt/oracle.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace distopt {

struct ScheduleSpec {
  std::string family = "ring";  ///< ring | metropolis | gossip | identity | matrix
  std::string graph = "ring";   ///< metropolis topology: ring | complete | star | path | edges
  std::string edges;            ///< "0-1,1-2" when graph = edges
  std::string matrix;           ///< "w00,w01;w10,w11" when family = matrix
  int q = 0;                    ///< 0 = family default
  std::uint64_t seed = 7;

  bool operator==(const ScheduleSpec&) const = default;
};

/// Everything a run needs, as read from a flat `key = value` file with `#`
/// comments. Every key has a default; to_config_text prints them all.
struct ExperimentConfig {
  RecipeSpec problem;
  ScheduleSpec schedule;
  std::string step_form = "polynomial";  ///< polynomial | constant
  double gamma0 = 0.5;
  double alpha = 0.6;
  std::string noise_kind = "gaussian";   ///< none | gaussian
  double noise_std = 0.1;
  std::optional<int> proj_s;
  std::optional<double> proj_beta;
  std::int64_t horizon = 10000;
  std::int64_t metric_stride = 100;
  std::uint64_t master_seed = 1;
  double init_scale = 1.0;
  std::string output = "metrics.csv";
  std::string oracle_file;               ///< sidecar written by `oracle`, read by `run`
  bool allow_nonstandard_steps = false;
  double oracle_tol = 1e-8;
  int oracle_restarts = 3;
  int oracle_grid_resolution = 300;
  double oracle_gamma0 = 0.1;
  int validate_samples = 200;
  std::int64_t validate_horizon = 1000;

  bool operator==(const ExperimentConfig&) const;
};

/// Thrown by the parser with every problem found, not just the first.
class ConfigParseError : public ConfigError {
 public:
  explicit ConfigParseError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);
/// Normalized echo; parse_config_text(to_config_text(c)) == c.
std::string to_config_text(const ExperimentConfig& cfg);
std::vector<std::string> config_violations(const ExperimentConfig& cfg);

ProblemInstance build_problem(const ExperimentConfig& cfg);
SchedulePtr build_schedule(const ScheduleSpec& spec, int n_agents);
RunConfig build_run_config(const ExperimentConfig& cfg, SchedulePtr schedule);

struct OracleSidecar {
  double phi_star = 0.0;
  Vec y_star;
};
void write_oracle_sidecar(const std::string& path, const OracleSolution& sol);
std::optional<OracleSidecar> read_oracle_sidecar(const std::string& path);

/// CSV text (header + rows) of one run.
std::string metrics_csv(const std::vector<MetricsRecord>& records);

struct ValidationEntry {
  std::string assumption;  ///< e.g. "Assumption 3"
  std::string check;
  bool pass = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  bool pass() const;
  /// Entries that failed, in order.
  std::vector<ValidationEntry> failures() const;
};

struct ValidateOptions {
  int samples = 200;
  std::int64_t horizon = 1000;
  int noise_draws = 100000;
  std::uint64_t seed = 2024;
};

/// Assumption checks: oracle convexity/Lipschitz sampling and nonempty local
/// sets (1), zero-mean noise (2), doubly stochastic W(t) with the w_min floor
/// and Q-connectivity over the horizon (3), step sizes (4), projection policy.
ValidationReport validate_setup(const ProblemInstance& p, const RunConfig& cfg,
                                const ValidateOptions& opts = {});
void print_validation(const ValidationReport& rep, std::ostream& out);

// Subcommands. Each returns the process exit status and writes a
// human-readable report to `out`.
int cmd_run(const ExperimentConfig& cfg, std::ostream& out);
int cmd_validate(const ExperimentConfig& cfg, std::ostream& out);
int cmd_oracle(const ExperimentConfig& cfg, std::ostream& out);
int cmd_sweep(const ExperimentConfig& cfg, const std::string& axis,
              const std::vector<std::string>& values, std::ostream& out);

const std::vector<std::string>& sweep_axes();
/// Copy of `cfg` with the sweep axis set to `value`.
ExperimentConfig apply_axis(const ExperimentConfig& cfg, const std::string& axis,
                            const std::string& value);

}  // namespace distopt
