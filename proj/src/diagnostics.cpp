#include "distopt/diagnostics.hpp"

#include "distopt/errors.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>

namespace distopt {

const std::string& csv_header() {
  static const std::string header =
      "t,gamma,phi_y,phi_proj,dist_G_sq,a_t,lemma1_resid,global_viol,local_viol_max";
  return header;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_row(const MetricsRecord& r) {
  std::string s = std::to_string(r.t);
  for (double v : {r.gamma, r.phi_y, r.phi_proj, r.dist_G_sq, r.a_t, r.lemma1_resid,
                   r.global_viol, r.local_viol_max}) {
    s += ',';
    s += format_double(v);
  }
  return s;
}

double disagreement(const std::vector<Vec>& e_states) {
  if (e_states.empty()) return 0.0;
  Vec mean = Vec::Zero(e_states.front().size());
  for (const auto& e : e_states) mean += e;
  mean /= static_cast<double>(e_states.size());
  double a = 0.0;
  for (const auto& e : e_states) a += (e - mean).squaredNorm();
  return a;
}

double tracking_residual(const std::vector<Vec>& e_states, const std::vector<Vec>& g_states) {
  if (e_states.size() != g_states.size() || e_states.empty())
    throw ConfigError("tracking_residual: state lists must be nonempty and equally long");
  Vec diff = Vec::Zero(e_states.front().size());
  for (std::size_t i = 0; i < e_states.size(); ++i) diff += e_states[i] - g_states[i];
  return (diff / static_cast<double>(e_states.size())).cwiseAbs().maxCoeff();
}

ErgodicAccumulator::ErgodicAccumulator(int dim, std::int64_t start)
    : start_(start), end_(start), sum_y_(Vec::Zero(dim)), sum_x_(Vec::Zero(dim)) {}

void ErgodicAccumulator::add(double gamma, const Vec& y, const Vec& x) {
  if (y.size() != sum_y_.size() || x.size() != sum_x_.size())
    throw ConfigError("ErgodicAccumulator: dimension mismatch");
  sum_gamma_ += gamma;
  sum_y_ += gamma * y;
  sum_x_ += gamma * x;
  ++end_;
}

ErgodicAccumulator ErgodicAccumulator::since(const ErgodicAccumulator& prefix) const {
  if (prefix.start_ != start_ || prefix.end_ > end_)
    throw ConfigError("ErgodicAccumulator::since: not a prefix of this window");
  ErgodicAccumulator w(static_cast<int>(sum_y_.size()), prefix.end_);
  w.end_ = end_;
  w.sum_gamma_ = sum_gamma_ - prefix.sum_gamma_;
  w.sum_y_ = sum_y_ - prefix.sum_y_;
  w.sum_x_ = sum_x_ - prefix.sum_x_;
  return w;
}

std::pair<Vec, Vec> ergodic_points(const ErgodicAccumulator& acc) {
  if (!(acc.sum_gamma() > 0.0)) throw ConfigError("ergodic_points: empty window (sum of steps is 0)");
  return {acc.sum_y() / acc.sum_gamma(), acc.sum_x() / acc.sum_gamma()};
}

double ergodic_gap(const ProblemInstance& p, const ErgodicAccumulator& acc, double phi_star,
                   double gamma_bar, double rho_proxy) {
  auto [y_tilde, x_tilde] = ergodic_points(acc);
  double gap = penalty_objective(p, x_tilde) - phi_star;
  if (rho_proxy != 0.0) gap += rho_proxy / gamma_bar * (y_tilde - x_tilde).squaredNorm();
  return gap;
}

namespace {

DecayFit fit_log(const std::vector<std::pair<double, double>>& series, bool log_x) {
  DecayFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [t, v] : series) {
    if (!(v > 0.0) || (log_x && !(t > 0.0))) {
      ++fit.excluded;
      continue;
    }
    double x = log_x ? std::log(t) : t;
    double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++fit.used;
  }
  if (fit.excluded > 0)
    std::cerr << "warning: decay fit dropped " << fit.excluded << " nonpositive samples\n";
  if (fit.used < 3) throw ConfigError("decay fit needs at least 3 positive samples");
  const double n = fit.used;
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw ConfigError("decay fit: abscissae are all equal");
  fit.exponent = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.exponent * sx) / n;
  return fit;
}

}  // namespace

DecayFit decay_fit(const std::vector<std::pair<double, double>>& series) {
  return fit_log(series, true);
}

DecayFit geometric_fit(const std::vector<std::pair<double, double>>& series) {
  return fit_log(series, false);
}

}  // namespace distopt
