#pragma once

#include "distopt/diagnostics.hpp"
#include "distopt/network.hpp"
#include "distopt/problem.hpp"
#include "distopt/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace distopt {

/// γ_t = γ₀ (constant) or γ₀·(t+1)^(−α) (polynomial).
struct StepSizeSchedule {
  enum class Form { Constant, Polynomial };
  Form form = Form::Polynomial;
  double gamma0 = 0.5;
  double alpha = 0.6;

  static StepSizeSchedule constant(double gamma0) { return {Form::Constant, gamma0, 0.0}; }
  static StepSizeSchedule polynomial(double gamma0, double alpha) {
    return {Form::Polynomial, gamma0, alpha};
  }

  double at(std::int64_t t) const;
  /// Positive steps with Σγ = ∞ and Σγ² < ∞, i.e. polynomial with α ∈ (0.5, 1].
  bool satisfies_assumption4() const;
  std::string describe() const;
};

/// Zero-mean perturbation V_i(t) added to the local subgradient.
struct NoiseModel {
  enum class Kind { None, Gaussian, StateDependent };
  using Sampler = std::function<Vec(int agent, const Vec& y, Rng& rng)>;

  Kind kind = Kind::None;
  double std = 0.0;                      ///< per-coordinate, Gaussian kind
  Sampler sampler;                       ///< StateDependent kind
  std::optional<double> variance_bound;  ///< ν, recorded for validation only

  static NoiseModel none() { return {}; }
  static NoiseModel gaussian(double std) { return {Kind::Gaussian, std, {}, std * std}; }
  static NoiseModel state_dependent(Sampler s, std::optional<double> nu = std::nullopt) {
    return {Kind::StateDependent, 0.0, std::move(s), nu};
  }

  Vec draw(int agent, const Vec& y, Rng& rng) const;
};

/// Per-agent sample counts s_i and Polyak weights β_i ∈ (0, 2/s_i). Empty
/// vectors mean defaults: s_i = min(1, |K̃_i|), β_i = 1/s_i.
struct ProjectionPolicy {
  std::vector<int> s;
  std::vector<double> beta;

  static ProjectionPolicy uniform(std::optional<int> s, std::optional<double> beta, int n_agents);
};

struct AgentState {
  Vec y;         ///< y_i(t), always in the hard set
  Vec e;         ///< e_i(t), estimate of the averaged coupling constraints
  Vec g_cached;  ///< g_i(y_i(t))
};

struct EngineState {
  std::int64_t t = 0;
  std::vector<AgentState> agents;
  std::vector<Rng> noise_rng;
  std::vector<Rng> sample_rng;
};

struct RunConfig {
  StepSizeSchedule steps;
  NoiseModel noise;
  ProjectionPolicy projection;
  SchedulePtr schedule;
  std::int64_t horizon = 1000;
  std::int64_t metric_stride = 100;
  std::uint64_t master_seed = 1;
  double init_scale = 1.0;
  bool allow_nonstandard_steps = false;

  std::optional<double> phi_star;  ///< enables gap reporting
  double rho_proxy = 0.0;
  double proj_tol = 1e-8;          ///< oracle projection used for P_G(y(t))
  double divergence_bound = 1e8;
};

/// Resolved per-agent (s_i, β_i), validated against the problem.
struct ResolvedProjection {
  std::vector<int> s;
  std::vector<double> beta;
};

ResolvedProjection resolve_projection(const ProblemInstance& p, const ProjectionPolicy& pol);

/// Checks config against the problem; throws AssumptionError / ConfigError
/// naming the first problem. Returns warnings (e.g. constant steps allowed).
std::vector<std::string> validate_run_config(const ProblemInstance& p, const RunConfig& cfg);

/// y_i(0) = P_hard(init_scale·ξ), ξ standard normal; e_i(0) = g_i(y_i(0)).
EngineState init_state(const ProblemInstance& p, const RunConfig& cfg, std::uint64_t seed);

/// ∂φ_i(y) + μ Σ_k ∂g_ik(y) e_k⁺.
Vec compute_q(const AgentSpec& agent, const Vec& yi, const Vec& ei, double mu);

/// P_hard(y − γ(q + v)).
Vec primal_step(const AgentSpec& agent, const Vec& yi, const Vec& qi, const Vec& vi, double gamma);

/// P_hard(z − β Σ_{k∈sampled} c_k⁺(z)/‖d_k‖² d_k), all terms evaluated at z.
/// Throws ModelError when a sampled constraint is positive with zero subgradient.
Vec approx_projection_step(const AgentSpec& agent, const Vec& zi, std::span<const int> sampled,
                           double beta);

/// Σ_j w_ij e_j + g_new − g_old.
Vec tracking_update(const Vec& w_row, const std::vector<Vec>& all_e, const Vec& g_new,
                    const Vec& g_old);

/// Uniform size-`count` subset of {0..universe−1} by partial Fisher–Yates,
/// returned sorted.
std::vector<int> sample_constraints(int count, int universe, Rng& rng);

/// One synchronous round t → t+1. Every agent reads only time-t values.
void iterate_inplace(EngineState& state, const ProblemInstance& p, const RunConfig& cfg,
                     const ResolvedProjection& proj);
EngineState iterate(const EngineState& state, const ProblemInstance& p, const RunConfig& cfg);

/// Ergodic averages over [s, t] reported at a record time.
struct ErgodicSnapshot {
  std::int64_t t = 0;
  std::int64_t s = 0;
  Vec y_tilde;
  Vec x_tilde;
  double phi_x_tilde = 0.0;
  double mismatch_sq = 0.0;        ///< ‖ỹ − x̃‖²
  double global_viol_y_tilde = 0.0;
  std::optional<double> gap;       ///< Φ(x̃) − Φ* + (ρ/γ̄)‖ỹ − x̃‖²
};

struct RunResult {
  EngineState final_state;
  std::vector<MetricsRecord> records;
  /// Per record: max_i ‖q_i‖² − 2L²(1 + μ²K‖e_i − ē‖²); empty when L is undeclared.
  std::vector<double> direction_bound_excess;
  std::vector<ErgodicSnapshot> ergodic_half;  ///< s = ⌊t/2⌋
  std::vector<ErgodicSnapshot> ergodic_full;  ///< s = 0
  std::vector<std::string> warnings;
  FeasibilityReport final_feasibility;
};

/// Runs `horizon` rounds and records metrics at t = 0, stride, 2·stride, …, T.
/// `on_record` (optional) sees each record as it is produced.
RunResult run(const ProblemInstance& p, const RunConfig& cfg,
              const std::function<void(const MetricsRecord&)>& on_record = {});

/// Record times for a horizon and stride: 0, stride, …, and T.
std::vector<std::int64_t> record_times(std::int64_t horizon, std::int64_t stride);

}  // namespace distopt
