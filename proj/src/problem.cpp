#include "distopt/problem.hpp"

#include "distopt/errors.hpp"

#include <algorithm>
#include <sstream>

namespace distopt {

namespace {

void check_fn(const FnPtr& f, int dim, int agent, const char* what) {
  std::ostringstream os;
  if (!f) {
    os << "agent " << agent << ": missing " << what << " oracle";
    throw ConfigError(os.str());
  }
  if (f->dim() != dim) {
    os << "agent " << agent << ": " << what << " oracle has dimension " << f->dim()
       << ", agent dimension is " << dim;
    throw ConfigError(os.str());
  }
}

}  // namespace

ProblemInstance::ProblemInstance(std::vector<AgentSpec> agents, int num_global, double penalty_mu,
                                 std::optional<double> phi_lipschitz)
    : agents_(std::move(agents)),
      num_global_(num_global),
      mu_(penalty_mu),
      phi_lipschitz_(phi_lipschitz) {
  if (agents_.empty()) throw ConfigError("problem needs at least one agent");
  if (num_global_ < 1) throw ConfigError("problem needs K >= 1 global constraints");
  if (!(mu_ >= 0.0)) throw ConfigError("penalty parameter mu must be nonnegative");
  for (int i = 0; i < num_agents(); ++i) {
    const auto& a = agents_[i];
    if (a.dim <= 0) throw ConfigError("agent dimension must be positive");
    check_fn(a.objective, a.dim, i, "objective");
    if (static_cast<int>(a.coupling.size()) != num_global_) {
      std::ostringstream os;
      os << "agent " << i << ": " << a.coupling.size() << " coupling functions, expected K = "
         << num_global_;
      throw ConfigError(os.str());
    }
    for (const auto& g : a.coupling) check_fn(g, a.dim, i, "coupling");
    for (const auto& c : a.soft) check_fn(c, a.dim, i, "soft constraint");
    if (a.hard_set.dim() != a.dim) {
      std::ostringstream os;
      os << "agent " << i << ": hard set dimension " << a.hard_set.dim() << " != " << a.dim;
      throw ConfigError(os.str());
    }
    offsets_.push_back(total_dim_);
    total_dim_ += a.dim;
  }
}

Vec ProblemInstance::block(const Vec& y, int i) const {
  return y.segment(offsets_.at(i), agents_.at(i).dim);
}

std::vector<Vec> ProblemInstance::split(const Vec& y) const {
  if (y.size() != total_dim_) {
    std::ostringstream os;
    os << "stacked point has dimension " << y.size() << ", problem expects " << total_dim_;
    throw ConfigError(os.str());
  }
  std::vector<Vec> parts;
  parts.reserve(agents_.size());
  for (int i = 0; i < num_agents(); ++i) parts.push_back(block(y, i));
  return parts;
}

Vec ProblemInstance::stack(std::span<const Vec> parts) const {
  if (static_cast<int>(parts.size()) != num_agents())
    throw ConfigError("stack: wrong number of agent blocks");
  Vec y(total_dim_);
  for (int i = 0; i < num_agents(); ++i) {
    if (parts[i].size() != agents_[i].dim) throw ConfigError("stack: block dimension mismatch");
    y.segment(offsets_[i], agents_[i].dim) = parts[i];
  }
  return y;
}

std::optional<double> ProblemInstance::common_lipschitz() const {
  if (!phi_lipschitz_) return std::nullopt;
  double L = *phi_lipschitz_;
  auto take = [&](const FnPtr& f) -> bool {
    auto b = f->lipschitz_bound();
    if (!b) return false;
    L = std::max(L, *b);
    return true;
  };
  for (const auto& a : agents_) {
    if (!take(a.objective)) return std::nullopt;
    for (const auto& g : a.coupling)
      if (!take(g)) return std::nullopt;
    for (const auto& c : a.soft)
      if (!take(c)) return std::nullopt;
  }
  return L;
}

ProblemInstance ProblemInstance::with_mu(double mu) const {
  // Φ's Lipschitz bound depends on μ; drop it rather than carry a stale value.
  std::optional<double> L = (mu == mu_) ? phi_lipschitz_ : std::nullopt;
  return ProblemInstance(agents_, num_global_, mu, L);
}

Vec agent_coupling(const AgentSpec& agent, const Vec& yi) {
  Vec g(agent.coupling.size());
  for (std::size_t k = 0; k < agent.coupling.size(); ++k) g[k] = agent.coupling[k]->value(yi);
  return g;
}

Vec global_constraint(const ProblemInstance& p, const Vec& y) {
  auto parts = p.split(y);
  Vec g = Vec::Zero(p.num_global());
  for (int i = 0; i < p.num_agents(); ++i) g += agent_coupling(p.agent(i), parts[i]);
  return g;
}

double penalty_objective(const ProblemInstance& p, const Vec& y) {
  auto parts = p.split(y);
  double obj = 0.0;
  Vec g = Vec::Zero(p.num_global());
  for (int i = 0; i < p.num_agents(); ++i) {
    obj += p.agent(i).objective->value(parts[i]);
    g += agent_coupling(p.agent(i), parts[i]);
  }
  double pen = g.cwiseMax(0.0).squaredNorm();
  return obj + p.mu() / (2.0 * p.num_agents()) * pen;
}

Vec penalty_subgradient(const ProblemInstance& p, const Vec& y) {
  auto parts = p.split(y);
  Vec gplus = global_constraint(p, y).cwiseMax(0.0);
  const double scale = p.mu() / p.num_agents();
  Vec out(p.total_dim());
  for (int i = 0; i < p.num_agents(); ++i) {
    const auto& a = p.agent(i);
    Vec gi = a.objective->subgradient(parts[i]);
    for (int k = 0; k < p.num_global(); ++k)
      if (gplus[k] > 0.0) gi += scale * gplus[k] * a.coupling[k]->subgradient(parts[i]);
    out.segment(p.offset(i), a.dim) = gi;
  }
  return out;
}

double FeasibilityReport::max_soft_violation() const {
  return soft_violation.empty() ? 0.0 : *std::max_element(soft_violation.begin(), soft_violation.end());
}

double FeasibilityReport::max_hard_distance() const {
  return hard_distance.empty() ? 0.0 : *std::max_element(hard_distance.begin(), hard_distance.end());
}

double soft_violation(const AgentSpec& agent, const Vec& yi) {
  double v = 0.0;
  for (const auto& c : agent.soft) v = std::max(v, c->value(yi));
  return v;
}

FeasibilityReport feasibility_report(const ProblemInstance& p, const Vec& y, double tol) {
  auto parts = p.split(y);
  FeasibilityReport r;
  Vec g = global_constraint(p, y);
  r.global_violation = std::max(0.0, g.maxCoeff());
  for (int i = 0; i < p.num_agents(); ++i) {
    r.soft_violation.push_back(soft_violation(p.agent(i), parts[i]));
    r.hard_distance.push_back(p.agent(i).hard_set.distance(parts[i]));
  }
  r.feasible = r.global_violation <= tol && r.max_soft_violation() <= tol &&
               r.max_hard_distance() <= tol;
  return r;
}

}  // namespace distopt
