#pragma once

#include "distopt/problem.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace distopt {

/// One row of the metrics stream; fields map 1:1 onto the CSV columns.
struct MetricsRecord {
  std::int64_t t = 0;
  double gamma = 0.0;
  double phi_y = 0.0;          ///< Φ(y(t))
  double phi_proj = 0.0;       ///< Φ(P_G(y(t)))
  double dist_G_sq = 0.0;      ///< d²_G(y(t))
  double a_t = 0.0;            ///< Σ_i ‖e_i − ē‖²
  double lemma1_resid = 0.0;   ///< ‖ē − ḡ‖∞
  double global_viol = 0.0;    ///< max_k g_k⁺(y(t))
  double local_viol_max = 0.0; ///< max_i max_k c_ik⁺(y_i(t))
};

/// Versioned CSV header (schema v1).
const std::string& csv_header();
/// 17 significant digits, so doubles round-trip exactly.
std::string format_double(double v);
std::string csv_row(const MetricsRecord& r);

/// Σ_i ‖e_i − ē‖² with ē the arithmetic mean.
double disagreement(const std::vector<Vec>& e_states);

/// ‖mean(e) − mean(g)‖∞.
double tracking_residual(const std::vector<Vec>& e_states, const std::vector<Vec>& g_states);

/// Step-size weighted sums over a window [start, end) of iterations:
/// Σγ_k, Σγ_k y(k), Σγ_k P_G(y(k)).
class ErgodicAccumulator {
 public:
  ErgodicAccumulator() = default;
  ErgodicAccumulator(int dim, std::int64_t start = 0);

  void add(double gamma, const Vec& y, const Vec& x);

  /// The window [prefix.end, end) when `prefix` is an earlier snapshot of the
  /// same running sum.
  ErgodicAccumulator since(const ErgodicAccumulator& prefix) const;

  std::int64_t start() const { return start_; }
  std::int64_t end() const { return end_; }
  double sum_gamma() const { return sum_gamma_; }
  const Vec& sum_y() const { return sum_y_; }
  const Vec& sum_x() const { return sum_x_; }

 private:
  std::int64_t start_ = 0;
  std::int64_t end_ = 0;
  double sum_gamma_ = 0.0;
  Vec sum_y_;
  Vec sum_x_;
};

/// (ỹ(s,t), x̃(s,t)). Throws ConfigError for an empty window (Σγ = 0).
std::pair<Vec, Vec> ergodic_points(const ErgodicAccumulator& acc);

/// Φ(x̃) − Φ* + (rho_proxy/γ̄)·‖ỹ − x̃‖².
double ergodic_gap(const ProblemInstance& p, const ErgodicAccumulator& acc, double phi_star,
                   double gamma_bar, double rho_proxy = 0.0);

struct DecayFit {
  double exponent = 0.0;   ///< slope of log(value) vs log(t)
  double intercept = 0.0;
  int used = 0;
  int excluded = 0;        ///< nonpositive samples dropped
};

/// Least squares of log(value) on log(t). Needs ≥ 3 positive samples.
DecayFit decay_fit(const std::vector<std::pair<double, double>>& series);

/// Least squares of log(value) on t: the per-step log-contraction of a
/// geometrically decaying series. Same sample rules as decay_fit.
DecayFit geometric_fit(const std::vector<std::pair<double, double>>& series);

}  // namespace distopt
