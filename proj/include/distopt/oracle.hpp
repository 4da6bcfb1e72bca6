#pragma once

#include "distopt/problem.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace distopt {

/// Projection onto hard ∩ soft by Dykstra's alternating scheme: the soft
/// sublevel sets {c_k ≤ 0} are handled by full Polyak steps (β = 1, exact for
/// affine c_k), the hard set by its closed form, which always comes last so
/// the result lies in the hard set. Feasible inputs are returned unchanged.
/// Throws InfeasibleError after `max_iters` sweeps without convergence.
Vec exact_project_feasible(const AgentSpec& agent, const Vec& x, double tol = 1e-8,
                           int max_iters = 100000);

/// Stacked version: P_G(y) block by block.
Vec project_feasible(const ProblemInstance& p, const Vec& y, double tol = 1e-8);

struct OracleCertificate {
  double final_step_norm = 0.0;
  double feasibility_residual = 0.0;
  double restart_spread = 0.0;
  std::int64_t iterations = 0;  ///< summed over restarts
  bool converged = false;       ///< every restart met the stopping rule
  std::vector<double> restart_values;
};

struct OracleSolution {
  Vec y_star;
  double phi_star = 0.0;
  OracleCertificate certificate;
};

struct CentralOptions {
  double gamma0 = 0.1;
  std::int64_t max_iters = std::int64_t{1} << 21;
  std::uint64_t seed = 12345;
};

/// Noise-free projected subgradient on Φ over G with γ_t = γ₀/√(t+1), run in
/// doubling epochs until the epoch-averaged objective and the best value both
/// move by ≤ tol. Repeated from `restarts` random feasible starts; throws
/// OracleError if the restart values spread by more than 100·tol.
OracleSolution solve_central(const ProblemInstance& p, double tol = 1e-8, int restarts = 3,
                             const CentralOptions& opts = {});

struct GridResult {
  double phi_min = 0.0;
  Vec argmin;
  std::int64_t points_evaluated = 0;
  std::int64_t points_feasible = 0;
  /// L·diameter/resolution with L the declared Φ constant (NaN if undeclared).
  double error_bound = 0.0;
};

/// Brute-force min of Φ over the feasible points of a uniform grid with
/// `resolution` intervals per coordinate (so resolution 1 visits the box
/// corners). Needs total dimension ≤ 3 and box hard sets; throws
/// ConfigError otherwise and OracleError when no grid point is feasible.
GridResult grid_oracle(const ProblemInstance& p, int resolution, double feas_tol = 1e-9);

struct OracleViolation {
  int agent = -1;          ///< -1 for the stacked Φ check
  std::string function;    ///< "phi", "g[k]", "c[k]" or "Phi"
  std::string kind;        ///< "convexity", "lipschitz-value", "lipschitz-subgradient"
  Vec x, y;
  double amount = 0.0;     ///< size of the violation
};

struct OracleValidationReport {
  std::int64_t checks = 0;
  std::vector<OracleViolation> violations;
  bool pass() const { return violations.empty(); }
};

/// Samples point pairs in each hard set and checks the subgradient inequality
/// for every oracle, plus declared Lipschitz bounds (including Φ's).
OracleValidationReport validate_oracles(const ProblemInstance& p, int samples,
                                        std::uint64_t seed);

}  // namespace distopt
