#include "distopt/oracle.hpp"

#include "distopt/errors.hpp"
#include "distopt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace distopt {

namespace {

// Full Polyak step onto {c ≤ 0}; the exact projection when c is affine.
Vec polyak_step(const ConvexFunction& c, const Vec& y) {
  double v = c.value(y);
  if (v <= 0.0) return y;
  Vec d = c.subgradient(y);
  double dn = d.squaredNorm();
  if (dn == 0.0)
    throw InfeasibleError("soft constraint " + c.describe() +
                          " is positive with a zero subgradient; its sublevel set is empty");
  return y - (v / dn) * d;
}

bool hard_fixed(const SimpleSet& s, const Vec& x) { return s.project(x) == x; }

}  // namespace

Vec exact_project_feasible(const AgentSpec& agent, const Vec& x, double tol, int max_iters) {
  if (x.size() != agent.dim) throw ConfigError("exact_project_feasible: dimension mismatch");
  if (hard_fixed(agent.hard_set, x) && soft_violation(agent, x) <= 0.0) return x;

  const std::size_t m = agent.soft.size();
  if (m == 0) return agent.hard_set.project(x);

  std::vector<Vec> incr(m + 1, Vec::Zero(x.size()));
  Vec cur = x;
  for (int sweep = 0; sweep < max_iters; ++sweep) {
    Vec prev = cur;
    for (std::size_t j = 0; j < m; ++j) {
      Vec shifted = cur + incr[j];
      cur = polyak_step(*agent.soft[j], shifted);
      incr[j] = shifted - cur;
    }
    Vec shifted = cur + incr[m];
    cur = agent.hard_set.project(shifted);
    incr[m] = shifted - cur;

    if (soft_violation(agent, cur) <= tol && (cur - prev).norm() <= tol) return cur;
  }
  std::ostringstream os;
  os << "feasibility projection did not converge in " << max_iters
     << " sweeps; the local constraint set is probably empty (residual violation "
     << soft_violation(agent, cur) << ")";
  throw InfeasibleError(os.str());
}

Vec project_feasible(const ProblemInstance& p, const Vec& y, double tol) {
  auto parts = p.split(y);
  for (int i = 0; i < p.num_agents(); ++i)
    parts[i] = exact_project_feasible(p.agent(i), parts[i], tol);
  return p.stack(parts);
}

namespace {

struct RestartOutcome {
  Vec y;
  double value;
  double step_norm;
  std::int64_t iterations;
  bool converged;
};

RestartOutcome central_restart(const ProblemInstance& p, double tol, const CentralOptions& opts,
                               Rng& rng) {
  const double proj_tol = std::max(1e-13, 1e-2 * tol);
  std::vector<Vec> start;
  for (const auto& a : p.agents())
    start.push_back(exact_project_feasible(a, a.hard_set.sample(rng), proj_tol));
  Vec y = p.stack(start);

  double best_val = penalty_objective(p, y);
  Vec best_y = y;
  double prev_avg_val = std::numeric_limits<double>::quiet_NaN();
  double avg_val = best_val;
  Vec avg_y = y;
  double step_norm = 0.0;
  std::int64_t t = 0;
  std::int64_t epoch_end = 1024;
  bool converged = false;

  while (t < opts.max_iters) {
    const double best_before = best_val;
    double sum_gamma = 0.0;
    Vec sum_y = Vec::Zero(y.size());
    const std::int64_t stop = std::min(epoch_end, opts.max_iters);
    for (; t < stop; ++t) {
      double val = penalty_objective(p, y);
      if (val < best_val) {
        best_val = val;
        best_y = y;
      }
      const double gamma = opts.gamma0 / std::sqrt(static_cast<double>(t + 1));
      sum_gamma += gamma;
      sum_y += gamma * y;
      Vec next = project_feasible(p, y - gamma * penalty_subgradient(p, y), proj_tol);
      step_norm = (next - y).norm();
      y = std::move(next);
    }
    avg_y = project_feasible(p, sum_y / sum_gamma, proj_tol);
    avg_val = penalty_objective(p, avg_y);
    double last_val = penalty_objective(p, y);
    if (last_val < best_val) {
      best_val = last_val;
      best_y = y;
    }
    if (std::abs(avg_val - prev_avg_val) <= tol && best_before - best_val <= tol) {
      converged = true;
      break;
    }
    prev_avg_val = avg_val;
    epoch_end *= 2;
  }
  if (avg_val < best_val) return {avg_y, avg_val, step_norm, t, converged};
  return {best_y, best_val, step_norm, t, converged};
}

}  // namespace

OracleSolution solve_central(const ProblemInstance& p, double tol, int restarts,
                             const CentralOptions& opts) {
  if (restarts < 1) throw ConfigError("solve_central: need at least one restart");
  if (p.total_dim() > 50) throw ConfigError("solve_central: desk-scale oracle, total dim <= 50");

  OracleSolution sol;
  sol.phi_star = std::numeric_limits<double>::infinity();
  sol.certificate.converged = true;
  for (int r = 0; r < restarts; ++r) {
    Rng rng = make_stream(opts.seed, static_cast<std::uint64_t>(r), 0xC0FFEEull);
    RestartOutcome out = central_restart(p, tol, opts, rng);
    sol.certificate.restart_values.push_back(out.value);
    sol.certificate.iterations += out.iterations;
    sol.certificate.converged = sol.certificate.converged && out.converged;
    if (out.value < sol.phi_star) {
      sol.phi_star = out.value;
      sol.y_star = out.y;
      sol.certificate.final_step_norm = out.step_norm;
    }
  }
  const auto& vals = sol.certificate.restart_values;
  auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
  sol.certificate.restart_spread = *hi - *lo;

  auto feas = feasibility_report(p, sol.y_star);
  sol.certificate.feasibility_residual = std::max(feas.max_soft_violation(), feas.max_hard_distance());

  if (sol.certificate.restart_spread > 100.0 * tol) {
    std::ostringstream os;
    os << "unreliable oracle: restart spread " << sol.certificate.restart_spread
       << " exceeds 100*tol = " << 100.0 * tol;
    throw OracleError(os.str());
  }
  return sol;
}

GridResult grid_oracle(const ProblemInstance& p, int resolution, double feas_tol) {
  if (resolution < 1) throw ConfigError("grid_oracle: resolution must be >= 1");
  if (p.total_dim() > 3) throw ConfigError("grid_oracle: total dimension must be <= 3");

  const int N = p.num_agents();
  const int K = p.num_global();

  // Per-agent tables: objective value and coupling vector at each feasible
  // grid point of that agent's box.
  struct AgentTable {
    std::vector<double> obj;
    std::vector<Vec> g;
    std::vector<Vec> pts;
  };
  std::vector<AgentTable> tables(N);
  Vec lo_all(p.total_dim()), hi_all(p.total_dim());
  GridResult res;
  std::int64_t grid_points = 1;

  for (int i = 0; i < N; ++i) {
    const auto& a = p.agent(i);
    auto box = a.hard_set.as_box();
    if (!box || !box->first.allFinite() || !box->second.allFinite())
      throw ConfigError("grid_oracle: agent " + std::to_string(i) +
                        " hard set is not a bounded box");
    const Vec& lo = box->first;
    const Vec& hi = box->second;
    lo_all.segment(p.offset(i), a.dim) = lo;
    hi_all.segment(p.offset(i), a.dim) = hi;

    std::int64_t count = 1;
    for (int d = 0; d < a.dim; ++d) count *= (resolution + 1);
    grid_points *= count;
    Vec pt(a.dim);
    for (std::int64_t idx = 0; idx < count; ++idx) {
      std::int64_t rem = idx;
      for (int d = 0; d < a.dim; ++d) {
        int j = static_cast<int>(rem % (resolution + 1));
        rem /= (resolution + 1);
        pt[d] = (j == resolution) ? hi[d] : lo[d] + (hi[d] - lo[d]) * j / resolution;
      }
      if (soft_violation(a, pt) > feas_tol) continue;
      tables[i].obj.push_back(a.objective->value(pt));
      tables[i].g.push_back(agent_coupling(a, pt));
      tables[i].pts.push_back(pt);
    }
    if (tables[i].obj.empty())
      throw OracleError("grid_oracle: no feasible grid point for agent " + std::to_string(i));
  }

  const double scale = p.mu() / (2.0 * N);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_idx(N, 0), idx(N, 0);
  std::vector<double> obj_acc(N + 1, 0.0);
  std::vector<Vec> g_acc(N + 1, Vec::Zero(K));
  std::int64_t evaluated = 0;

  std::function<void(int)> descend = [&](int level) {
    if (level == N) {
      double val = obj_acc[N] + scale * g_acc[N].cwiseMax(0.0).squaredNorm();
      ++evaluated;
      if (val < best) {
        best = val;
        best_idx = idx;
      }
      return;
    }
    const auto& tab = tables[level];
    for (std::size_t j = 0; j < tab.obj.size(); ++j) {
      idx[level] = j;
      obj_acc[level + 1] = obj_acc[level] + tab.obj[j];
      g_acc[level + 1] = g_acc[level] + tab.g[j];
      descend(level + 1);
    }
  };
  descend(0);

  std::vector<Vec> parts;
  for (int i = 0; i < N; ++i) parts.push_back(tables[i].pts[best_idx[i]]);

  res.phi_min = best;
  res.argmin = p.stack(parts);
  res.points_evaluated = grid_points;
  res.points_feasible = evaluated;
  const double diam = (hi_all - lo_all).norm();
  res.error_bound = p.phi_lipschitz() ? *p.phi_lipschitz() * diam / resolution
                                      : std::numeric_limits<double>::quiet_NaN();
  return res;
}

OracleValidationReport validate_oracles(const ProblemInstance& p, int samples, std::uint64_t seed) {
  OracleValidationReport rep;
  auto check = [&](int agent, const std::string& name, const ConvexFunction& f, const Vec& x,
                   const Vec& y) {
    const double fx = f.value(x);
    const double fy = f.value(y);
    const Vec d = f.subgradient(y);
    const double dist = (x - y).norm();
    const double tol = 1e-9 * (1.0 + std::abs(fx) + std::abs(fy) + d.norm() * dist);
    ++rep.checks;
    double gap = fx - fy - d.dot(x - y);
    if (gap < -tol) rep.violations.push_back({agent, name, "convexity", x, y, -gap});
    if (auto L = f.lipschitz_bound()) {
      double excess = std::abs(fx - fy) - *L * dist;
      if (excess > tol) rep.violations.push_back({agent, name, "lipschitz-value", x, y, excess});
      double gexcess = d.norm() - *L;
      if (gexcess > 1e-9 * (1.0 + *L))
        rep.violations.push_back({agent, name, "lipschitz-subgradient", y, y, gexcess});
    }
  };

  for (int i = 0; i < p.num_agents(); ++i) {
    const auto& a = p.agent(i);
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(i), 0xA55E57ull);
    for (int s = 0; s < samples; ++s) {
      Vec x = a.hard_set.sample(rng);
      Vec y = a.hard_set.sample(rng);
      check(i, "phi", *a.objective, x, y);
      for (std::size_t k = 0; k < a.coupling.size(); ++k)
        check(i, "g[" + std::to_string(k) + "]", *a.coupling[k], x, y);
      for (std::size_t k = 0; k < a.soft.size(); ++k)
        check(i, "c[" + std::to_string(k) + "]", *a.soft[k], x, y);
    }
  }

  // Stacked Φ: convexity of the penalty surrogate and its declared bound.
  Rng rng = make_stream(seed, 0xFFFFFFFFull, 0xA55E57ull);
  for (int s = 0; s < samples; ++s) {
    std::vector<Vec> xs, ys;
    for (const auto& a : p.agents()) {
      xs.push_back(a.hard_set.sample(rng));
      ys.push_back(a.hard_set.sample(rng));
    }
    Vec x = p.stack(xs), y = p.stack(ys);
    double fx = penalty_objective(p, x), fy = penalty_objective(p, y);
    Vec d = penalty_subgradient(p, y);
    double dist = (x - y).norm();
    double tol = 1e-9 * (1.0 + std::abs(fx) + std::abs(fy) + d.norm() * dist);
    ++rep.checks;
    double gap = fx - fy - d.dot(x - y);
    if (gap < -tol) rep.violations.push_back({-1, "Phi", "convexity", x, y, -gap});
    if (auto L = p.phi_lipschitz()) {
      double excess = std::abs(fx - fy) - *L * dist;
      if (excess > tol) rep.violations.push_back({-1, "Phi", "lipschitz-value", x, y, excess});
      double gexcess = d.norm() - *L;
      if (gexcess > 1e-9 * (1.0 + *L))
        rep.violations.push_back({-1, "Phi", "lipschitz-subgradient", y, y, gexcess});
    }
  }
  return rep;
}

}  // namespace distopt
