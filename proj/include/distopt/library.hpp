#pragma once

#include "distopt/problem.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace distopt {

/// Scalar agents, φ_i = (y_i − a_i)², hard set [0, 10], soft y_i ≤ u_i, one
/// coupling Σ y_i − b ≤ 0 split evenly as g_i = y_i − b/N.
struct CoupledQuadraticParams {
  std::vector<double> a;
  std::vector<double> u;
  double b = 0.0;
  double mu = 10.0;
};

/// Random a_i ∈ [1, 10], u_i ∈ [3, 8], b = ½ Σ min(a_i, u_i) so the coupling
/// constraint binds at the decoupled optimum.
CoupledQuadraticParams coupled_quadratic_params(int n, std::uint64_t seed, double mu = 10.0);
ProblemInstance make_coupled_quadratic(const CoupledQuadraticParams& params);
ProblemInstance make_coupled_quadratic(int n, std::uint64_t seed, double mu = 10.0);

/// Decoupled optimum min(a_i, u_i) when b ≥ Σ u_i (coupling inactive).
double coupled_quadratic_inactive_phi_star(const CoupledQuadraticParams& params);

struct ResourceAllocationOptions {
  double mu = 10.0;
  double capacity_factor = 0.5;  ///< b_k = factor · Σ_i A_ik·d_i
  bool zero_demand = false;      ///< demands d_i = 0, so y* = 0
};

/// Rates y_i ∈ [0, 5]², cost Σ_j p_ij (y_ij − d_ij)², capacity couplings
/// Σ_i A_ik·y_i − b_k ≤ 0, soft mix limits y_1 ≤ 2y_2 + 1 and y_2 ≤ 2y_1 + 1.
ProblemInstance make_resource_allocation(int n, int k, std::uint64_t seed,
                                         const ResourceAllocationOptions& opts = {});

/// Agents in [−5, 5]² with m random affine soft constraints
/// n_k·(y − x₀) − 0.1 − r_k ≤ 0 (unit n_k, r_k ∈ [0, 2]) through a known
/// interior point x₀, φ_i = ‖y − a_i‖², one coupling Σ 1ᵀy_i − b ≤ 0.
struct ManySoftInstance {
  ProblemInstance problem;
  std::vector<Vec> interior_points;  ///< x₀ per agent
};
ManySoftInstance make_many_soft_constraints(int n, int m, std::uint64_t seed, double mu = 10.0);

/// Named recipe plus parameters, as read from a config file.
struct RecipeSpec {
  std::string name = "coupled_quadratic";
  int n = 3;
  int k = 1;
  int m = 10;
  std::uint64_t seed = 1;
  double mu = 10.0;
  std::optional<std::vector<double>> a, u;  ///< coupled_quadratic overrides
  std::optional<double> b;
  double capacity_factor = 0.5;
  bool zero_demand = false;
  bool inject_concave = false;  ///< replace agent 0's objective by a concave one

  bool operator==(const RecipeSpec&) const = default;
};

ProblemInstance make_recipe(const RecipeSpec& spec);
const std::vector<std::string>& recipe_names();

/// Copy of `p` with agent `agent`'s objective replaced by −‖y‖² (a fixture
/// for the convexity validator).
ProblemInstance inject_concave_objective(const ProblemInstance& p, int agent = 0);

}  // namespace distopt
