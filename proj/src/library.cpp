#include "distopt/library.hpp"

#include "distopt/errors.hpp"
#include "distopt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace distopt {

namespace {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// ‖∇Φ‖ ≤ sqrt(Σ_i (Lφ_i + (μ/N) Σ_k Gmax_k·Lg_ik)²) on the product of hard sets.
double phi_bound(const std::vector<double>& l_obj, const std::vector<std::vector<double>>& l_g,
                 const std::vector<double>& g_max, double mu) {
  const double n = static_cast<double>(l_obj.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < l_obj.size(); ++i) {
    double li = l_obj[i];
    for (std::size_t k = 0; k < g_max.size(); ++k) li += mu / n * g_max[k] * l_g[i][k];
    acc += li * li;
  }
  return std::sqrt(acc);
}

}  // namespace

CoupledQuadraticParams coupled_quadratic_params(int n, std::uint64_t seed, double mu) {
  if (n < 1) throw ConfigError("coupled_quadratic: N must be >= 1");
  Rng rng = make_stream(seed, 0xC0DEull, 1);
  CoupledQuadraticParams p;
  p.mu = mu;
  double decoupled = 0.0;
  for (int i = 0; i < n; ++i) {
    p.a.push_back(uniform(rng, 1.0, 10.0));
    p.u.push_back(uniform(rng, 3.0, 8.0));
    decoupled += std::min(p.a.back(), p.u.back());
  }
  p.b = 0.5 * decoupled;
  return p;
}

ProblemInstance make_coupled_quadratic(const CoupledQuadraticParams& params) {
  const int n = static_cast<int>(params.a.size());
  if (n < 1 || params.u.size() != params.a.size())
    throw ConfigError("coupled_quadratic: a and u must be nonempty and equally long");
  constexpr double lo = 0.0, hi = 10.0;
  std::vector<AgentSpec> agents;
  std::vector<double> l_obj;
  std::vector<std::vector<double>> l_g;
  for (int i = 0; i < n; ++i) {
    AgentSpec a;
    a.dim = 1;
    const double lphi = 2.0 * std::max(std::abs(params.a[i] - lo), std::abs(hi - params.a[i]));
    a.objective = square1(params.a[i], 1.0, lphi);
    a.coupling = {affine1(1.0, -params.b / n, 1.0)};
    a.hard_set = SimpleSet::box(1, lo, hi);
    a.soft = {affine1(1.0, -params.u[i], 1.0)};
    agents.push_back(std::move(a));
    l_obj.push_back(lphi);
    l_g.push_back({1.0});
  }
  const double g_max = std::max(0.0, hi * n - params.b);
  return ProblemInstance(std::move(agents), 1, params.mu, phi_bound(l_obj, l_g, {g_max}, params.mu));
}

ProblemInstance make_coupled_quadratic(int n, std::uint64_t seed, double mu) {
  return make_coupled_quadratic(coupled_quadratic_params(n, seed, mu));
}

double coupled_quadratic_inactive_phi_star(const CoupledQuadraticParams& params) {
  double phi = 0.0;
  for (std::size_t i = 0; i < params.a.size(); ++i) {
    double y = std::clamp(params.a[i], 0.0, std::min(10.0, params.u[i]));
    phi += (y - params.a[i]) * (y - params.a[i]);
  }
  return phi;
}

ProblemInstance make_resource_allocation(int n, int k, std::uint64_t seed,
                                         const ResourceAllocationOptions& opts) {
  if (n < 1) throw ConfigError("resource_allocation: N must be >= 1");
  if (k < 1) throw ConfigError("resource_allocation: K must be >= 1 (coupling constraints required)");
  constexpr double lo = 0.0, hi = 5.0;
  Rng rng = make_stream(seed, 0xA110Cull, 2);

  std::vector<Vec> demand(n), price(n);
  std::vector<std::vector<Vec>> A(n, std::vector<Vec>(k));
  for (int i = 0; i < n; ++i) {
    price[i] = Vec(2);
    demand[i] = Vec(2);
    for (int j = 0; j < 2; ++j) {
      price[i][j] = uniform(rng, 0.5, 2.0);
      demand[i][j] = opts.zero_demand ? 0.0 : uniform(rng, 1.0, 4.0);
    }
    for (int c = 0; c < k; ++c) A[i][c] = Vec{{uniform(rng, 0.5, 1.5), uniform(rng, 0.5, 1.5)}};
  }
  std::vector<double> b(k, 0.0), g_max(k, 0.0);
  for (int c = 0; c < k; ++c) {
    double load = 0.0, peak = 0.0;
    for (int i = 0; i < n; ++i) {
      load += A[i][c].dot(opts.zero_demand ? Vec::Ones(2) : demand[i]);
      peak += hi * A[i][c].sum();
    }
    b[c] = opts.capacity_factor * load;
    g_max[c] = std::max(0.0, peak - b[c]);
  }

  std::vector<AgentSpec> agents;
  std::vector<double> l_obj;
  std::vector<std::vector<double>> l_g(n);
  for (int i = 0; i < n; ++i) {
    AgentSpec a;
    a.dim = 2;
    Vec reach = (demand[i].array() - lo).abs().max((hi - demand[i].array()).abs());
    const double lphi = 2.0 * price[i].cwiseProduct(reach).norm();
    auto obj = QuadraticFunction::weighted_distance(price[i], demand[i]);
    obj->set_lipschitz_bound(lphi);
    a.objective = obj;
    for (int c = 0; c < k; ++c) {
      a.coupling.push_back(affine(A[i][c], -b[c] / n, A[i][c].norm()));
      l_g[i].push_back(A[i][c].norm());
    }
    a.hard_set = SimpleSet::box(2, lo, hi);
    a.soft = {affine(Vec{{1.0, -2.0}}, -1.0, std::sqrt(5.0)),
              affine(Vec{{-2.0, 1.0}}, -1.0, std::sqrt(5.0))};
    agents.push_back(std::move(a));
    l_obj.push_back(lphi);
  }
  return ProblemInstance(std::move(agents), k, opts.mu, phi_bound(l_obj, l_g, g_max, opts.mu));
}

ManySoftInstance make_many_soft_constraints(int n, int m, std::uint64_t seed, double mu) {
  if (n < 1) throw ConfigError("many_soft: N must be >= 1");
  if (m < 10) throw ConfigError("many_soft: m must be >= 10");
  constexpr double lo = -5.0, hi = 5.0;
  Rng rng = make_stream(seed, 0x50F7ull, 3);

  std::vector<AgentSpec> agents;
  std::vector<Vec> interior;
  std::vector<double> l_obj;
  std::vector<std::vector<double>> l_g;
  double b = 0.0;
  for (int i = 0; i < n; ++i) {
    Vec x0{{uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)}};
    Vec target{{uniform(rng, lo, hi), uniform(rng, lo, hi)}};
    AgentSpec a;
    a.dim = 2;
    const double lphi = 2.0 * (target.norm() + hi * std::sqrt(2.0));
    auto obj = QuadraticFunction::weighted_distance(Vec::Ones(2), target);
    obj->set_lipschitz_bound(lphi);
    a.objective = obj;
    a.hard_set = SimpleSet::box(2, lo, hi);
    for (int k = 0; k < m; ++k) {
      const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      Vec normal{{std::cos(angle), std::sin(angle)}};
      const double slack = uniform(rng, 0.0, 2.0);
      a.soft.push_back(affine(normal, -normal.dot(x0) - 0.1 - slack, 1.0));
    }
    b += x0.sum();
    interior.push_back(x0);
    l_obj.push_back(lphi);
    l_g.push_back({std::sqrt(2.0)});
    agents.push_back(std::move(a));
  }
  for (auto& a : agents) a.coupling = {affine(Vec::Ones(2), -b / n, std::sqrt(2.0))};
  const double g_max = std::max(0.0, 2.0 * hi * n - b);
  ProblemInstance p(std::move(agents), 1, mu, phi_bound(l_obj, l_g, {g_max}, mu));
  return {std::move(p), std::move(interior)};
}

const std::vector<std::string>& recipe_names() {
  static const std::vector<std::string> names{"coupled_quadratic", "resource_allocation",
                                              "many_soft"};
  return names;
}

ProblemInstance make_recipe(const RecipeSpec& spec) {
  ProblemInstance p = [&]() -> ProblemInstance {
    if (spec.name == "coupled_quadratic") {
      CoupledQuadraticParams params = coupled_quadratic_params(spec.n, spec.seed, spec.mu);
      if (spec.a) params.a = *spec.a;
      if (spec.u) params.u = *spec.u;
      if (spec.b) params.b = *spec.b;
      if (params.a.size() != static_cast<std::size_t>(spec.n) ||
          params.u.size() != static_cast<std::size_t>(spec.n))
        throw ConfigError("coupled_quadratic: problem.a and problem.u need N entries");
      return make_coupled_quadratic(params);
    }
    if (spec.name == "resource_allocation")
      return make_resource_allocation(spec.n, spec.k, spec.seed,
                                      {spec.mu, spec.capacity_factor, spec.zero_demand});
    if (spec.name == "many_soft")
      return make_many_soft_constraints(spec.n, spec.m, spec.seed, spec.mu).problem;
    throw ConfigError("unknown problem recipe '" + spec.name + "'");
  }();
  if (spec.inject_concave) return inject_concave_objective(p, 0);
  return p;
}

ProblemInstance inject_concave_objective(const ProblemInstance& p, int agent) {
  std::vector<AgentSpec> agents = p.agents();
  const int d = agents.at(agent).dim;
  agents[agent].objective = callable(
      d, [](const Vec& y) { return -y.squaredNorm(); }, [](const Vec& y) -> Vec { return -2.0 * y; },
      "concave(-|y|^2)");
  return ProblemInstance(std::move(agents), p.num_global(), p.mu());
}

}  // namespace distopt
