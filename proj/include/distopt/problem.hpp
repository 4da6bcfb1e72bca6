#pragma once

#include "distopt/functions.hpp"
#include "distopt/sets.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace distopt {

/// One agent's private data: objective, its contribution to each coupling
/// constraint, a projection-friendly hard set and a list of soft constraints
/// {c_k ≤ 0} handled by random Polyak corrections.
struct AgentSpec {
  int dim = 1;
  FnPtr objective;
  std::vector<FnPtr> coupling;
  SimpleSet hard_set = SimpleSet::whole(1);
  std::vector<FnPtr> soft;
};

/// min Σ φ_i(y_i) + μ/(2N) Σ_k (Σ_i g_ik(y_i))₊²  over ∏ (hard_i ∩ soft_i).
class ProblemInstance {
 public:
  /// Validates N ≥ 1, K ≥ 1, μ ≥ 0 and every oracle dimension.
  /// μ = 0 is accepted here (it decouples the problem); run configs require μ > 0.
  ProblemInstance(std::vector<AgentSpec> agents, int num_global, double penalty_mu,
                  std::optional<double> phi_lipschitz = std::nullopt);

  int num_agents() const { return static_cast<int>(agents_.size()); }
  int num_global() const { return num_global_; }
  double mu() const { return mu_; }
  const AgentSpec& agent(int i) const { return agents_.at(i); }
  const std::vector<AgentSpec>& agents() const { return agents_; }

  /// Σ_i dim_i.
  int total_dim() const { return total_dim_; }
  /// Offset of agent i's block inside the stacked vector.
  int offset(int i) const { return offsets_.at(i); }
  Vec block(const Vec& y, int i) const;
  std::vector<Vec> split(const Vec& y) const;
  Vec stack(std::span<const Vec> parts) const;

  /// Declared Lipschitz constant of Φ on the product of hard sets.
  std::optional<double> phi_lipschitz() const { return phi_lipschitz_; }
  /// Common constant L covering Φ and every φ_i, g_ik, c_ik, or nullopt if any
  /// oracle lacks a declared bound.
  std::optional<double> common_lipschitz() const;

  ProblemInstance with_mu(double mu) const;

 private:
  std::vector<AgentSpec> agents_;
  int num_global_;
  double mu_;
  std::optional<double> phi_lipschitz_;
  std::vector<int> offsets_;
  int total_dim_ = 0;
};

/// g_i(y_i) for one agent, a K-vector.
Vec agent_coupling(const AgentSpec& agent, const Vec& yi);

/// g(y) = Σ_i g_i(y_i).
Vec global_constraint(const ProblemInstance& p, const Vec& y);

/// Φ(y) = Σ φ_i(y_i) + μ/(2N) Σ_k g_k⁺(y)².
double penalty_objective(const ProblemInstance& p, const Vec& y);

/// A subgradient of Φ at the stacked point y.
Vec penalty_subgradient(const ProblemInstance& p, const Vec& y);

struct FeasibilityReport {
  double global_violation = 0.0;            ///< max_k g_k⁺(y)
  std::vector<double> soft_violation;       ///< per agent max_k c_ik⁺(y_i)
  std::vector<double> hard_distance;        ///< per agent d(y_i, hard set)
  bool feasible = true;

  double max_soft_violation() const;
  double max_hard_distance() const;
};

constexpr double kDefaultFeasibilityTol = 1e-6;

FeasibilityReport feasibility_report(const ProblemInstance& p, const Vec& y,
                                     double tol = kDefaultFeasibilityTol);

/// max_k c_k⁺(y_i) over the agent's soft constraints (0 if none).
double soft_violation(const AgentSpec& agent, const Vec& yi);

}  // namespace distopt
