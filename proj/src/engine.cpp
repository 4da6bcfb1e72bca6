#include "distopt/engine.hpp"

#include "distopt/errors.hpp"
#include "distopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace distopt {

double StepSizeSchedule::at(std::int64_t t) const {
  if (form == Form::Constant) return gamma0;
  return gamma0 * std::pow(static_cast<double>(t + 1), -alpha);
}

bool StepSizeSchedule::satisfies_assumption4() const {
  return form == Form::Polynomial && gamma0 > 0.0 && alpha > 0.5 && alpha <= 1.0;
}

std::string StepSizeSchedule::describe() const {
  std::ostringstream os;
  if (form == Form::Constant)
    os << "constant(" << gamma0 << ")";
  else
    os << gamma0 << "*(t+1)^-" << alpha;
  return os.str();
}

Vec NoiseModel::draw(int agent, const Vec& y, Rng& rng) const {
  switch (kind) {
    case Kind::None:
      return Vec::Zero(y.size());
    case Kind::Gaussian: {
      std::normal_distribution<double> normal(0.0, std);
      Vec v(y.size());
      for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = normal(rng);
      return v;
    }
    case Kind::StateDependent: {
      Vec v = sampler(agent, y, rng);
      if (v.size() != y.size()) throw ConfigError("noise sampler returned wrong dimension");
      return v;
    }
  }
  return Vec::Zero(y.size());
}

ProjectionPolicy ProjectionPolicy::uniform(std::optional<int> s, std::optional<double> beta,
                                           int n_agents) {
  ProjectionPolicy pol;
  if (s) pol.s.assign(n_agents, *s);
  if (beta) pol.beta.assign(n_agents, *beta);
  return pol;
}

ResolvedProjection resolve_projection(const ProblemInstance& p, const ProjectionPolicy& pol) {
  const int N = p.num_agents();
  if (!pol.s.empty() && static_cast<int>(pol.s.size()) != N)
    throw ConfigError("projection.s must have one entry per agent");
  if (!pol.beta.empty() && static_cast<int>(pol.beta.size()) != N)
    throw ConfigError("projection.beta must have one entry per agent");

  ResolvedProjection r;
  for (int i = 0; i < N; ++i) {
    const int m = static_cast<int>(p.agent(i).soft.size());
    if (m == 0) {
      r.s.push_back(0);
      r.beta.push_back(0.0);
      continue;
    }
    int s = pol.s.empty() ? 1 : pol.s[i];
    if (s < 1 || s > m) {
      std::ostringstream os;
      os << "agent " << i << ": sample count s = " << s << " must lie in [1, " << m << "]";
      throw ConfigError(os.str());
    }
    double beta = pol.beta.empty() ? 1.0 / s : pol.beta[i];
    if (!(beta > 0.0) || !(beta * s < 2.0)) {
      std::ostringstream os;
      os << "agent " << i << ": beta = " << beta << " must lie in the open interval (0, 2/s) = (0, "
         << 2.0 / s << ")";
      throw ConfigError(os.str());
    }
    r.s.push_back(s);
    r.beta.push_back(beta);
  }
  return r;
}

std::vector<std::string> validate_run_config(const ProblemInstance& p, const RunConfig& cfg) {
  std::vector<std::string> warnings;
  if (!cfg.schedule) throw ConfigError("run config has no weight schedule");
  if (cfg.schedule->n_agents() != p.num_agents()) {
    std::ostringstream os;
    os << "schedule is for " << cfg.schedule->n_agents() << " agents, problem has "
       << p.num_agents();
    throw ConfigError(os.str());
  }
  if (!(cfg.schedule->w_min() > 0.0))
    throw AssumptionError("Assumption 3: nonzero weights must be bounded below by w_min > 0");
  if (cfg.horizon < 0) throw ConfigError("horizon must be >= 0");
  if (cfg.metric_stride < 1) throw ConfigError("metric_stride must be >= 1");
  if (!(cfg.steps.gamma0 >= 0.0)) throw ConfigError("step size gamma0 must be nonnegative");
  if (!cfg.steps.satisfies_assumption4()) {
    std::string msg = "Assumption 4: step sizes " + cfg.steps.describe() +
                      " are not positive with sum = inf and sum of squares < inf"
                      " (need polynomial with alpha in (0.5, 1])";
    if (!cfg.allow_nonstandard_steps) throw AssumptionError(msg);
    warnings.push_back("allowed by override: " + msg);
  }
  if (cfg.noise.kind == NoiseModel::Kind::Gaussian && !(cfg.noise.std >= 0.0))
    throw ConfigError("noise std must be nonnegative");
  if (cfg.noise.kind == NoiseModel::Kind::StateDependent && !cfg.noise.sampler)
    throw ConfigError("state-dependent noise needs a sampler");
  resolve_projection(p, cfg.projection);
  return warnings;
}

EngineState init_state(const ProblemInstance& p, const RunConfig& cfg, std::uint64_t seed) {
  EngineState st;
  st.t = 0;
  for (int i = 0; i < p.num_agents(); ++i) {
    const auto& a = p.agent(i);
    Rng init = make_stream(seed, static_cast<std::uint64_t>(i), 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec x(a.dim);
    for (int j = 0; j < a.dim; ++j) x[j] = cfg.init_scale * normal(init);
    AgentState ag;
    ag.y = a.hard_set.project(x);
    ag.g_cached = agent_coupling(a, ag.y);
    ag.e = ag.g_cached;
    st.agents.push_back(std::move(ag));
    st.noise_rng.push_back(make_stream(seed, static_cast<std::uint64_t>(i), 2));
    st.sample_rng.push_back(make_stream(seed, static_cast<std::uint64_t>(i), 3));
  }
  return st;
}

Vec compute_q(const AgentSpec& agent, const Vec& yi, const Vec& ei, double mu) {
  Vec q = agent.objective->subgradient(yi);
  for (std::size_t k = 0; k < agent.coupling.size(); ++k) {
    const double ek = ei[static_cast<Eigen::Index>(k)];
    if (ek > 0.0 && mu != 0.0) q += (mu * ek) * agent.coupling[k]->subgradient(yi);
  }
  return q;
}

Vec primal_step(const AgentSpec& agent, const Vec& yi, const Vec& qi, const Vec& vi, double gamma) {
  if (gamma == 0.0) return agent.hard_set.project(yi);
  return agent.hard_set.project(yi - gamma * (qi + vi));
}

Vec approx_projection_step(const AgentSpec& agent, const Vec& zi, std::span<const int> sampled,
                           double beta) {
  Vec correction = Vec::Zero(zi.size());
  bool moved = false;
  for (int k : sampled) {
    const auto& c = *agent.soft.at(static_cast<std::size_t>(k));
    const double v = c.value(zi);
    if (v <= 0.0) continue;
    Vec d = c.subgradient(zi);
    const double dn = d.squaredNorm();
    if (dn == 0.0) {
      std::ostringstream os;
      os << "soft constraint " << k << " (" << c.describe()
         << ") is violated with a zero subgradient; its feasible set is empty";
      throw ModelError(os.str());
    }
    correction += (v / dn) * d;
    moved = true;
  }
  if (!moved) return agent.hard_set.project(zi);
  return agent.hard_set.project(zi - beta * correction);
}

Vec tracking_update(const Vec& w_row, const std::vector<Vec>& all_e, const Vec& g_new,
                    const Vec& g_old) {
  if (w_row.size() != static_cast<Eigen::Index>(all_e.size()))
    throw ConfigError("tracking_update: weight row length differs from agent count");
  if (g_new.size() != g_old.size()) throw ConfigError("tracking_update: g size mismatch");
  Vec mixed = Vec::Zero(g_new.size());
  for (std::size_t j = 0; j < all_e.size(); ++j) {
    if (all_e[j].size() != g_new.size()) throw ConfigError("tracking_update: e size mismatch");
    const double w = w_row[static_cast<Eigen::Index>(j)];
    if (w != 0.0) mixed += w * all_e[j];
  }
  return mixed + (g_new - g_old);
}

std::vector<int> sample_constraints(int count, int universe, Rng& rng) {
  if (count < 1 || count > universe) {
    std::ostringstream os;
    os << "cannot sample " << count << " constraints out of " << universe;
    throw ConfigError(os.str());
  }
  std::vector<int> idx(static_cast<std::size_t>(universe));
  std::iota(idx.begin(), idx.end(), 0);
  for (int j = 0; j < count; ++j) {
    std::uniform_int_distribution<int> pick(j, universe - 1);
    std::swap(idx[j], idx[pick(rng)]);
  }
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

void check_weights(const WeightMatrix& W, const WeightSchedule& s, std::int64_t t) {
  auto rep = check_doubly_stochastic(W, 1e-9);
  if (!rep.pass) {
    std::ostringstream os;
    os << "Assumption 3: W(" << t << ") is not doubly stochastic (row deviation "
       << rep.max_row_dev << ", column deviation " << rep.max_col_dev << ")";
    throw AssumptionError(os.str());
  }
  if (rep.min_nonzero < s.w_min() * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "Assumption 3: W(" << t << ") has nonzero weight " << rep.min_nonzero
       << " below w_min = " << s.w_min();
    throw AssumptionError(os.str());
  }
}

}  // namespace

void iterate_inplace(EngineState& state, const ProblemInstance& p, const RunConfig& cfg,
                     const ResolvedProjection& proj) {
  const int N = p.num_agents();
  const std::int64_t t = state.t;
  const double gamma = cfg.steps.at(t);
  const WeightMatrix W = cfg.schedule->weights_at(t);
  check_weights(W, *cfg.schedule, t);

  std::vector<Vec> y_next(N), g_next(N), e_old(N);
  for (int i = 0; i < N; ++i) {
    const auto& a = p.agent(i);
    const auto& ag = state.agents[i];
    e_old[i] = ag.e;
    Vec q = compute_q(a, ag.y, ag.e, p.mu());
    Vec v = cfg.noise.draw(i, ag.y, state.noise_rng[i]);
    Vec z = primal_step(a, ag.y, q, v, gamma);
    if (proj.s[i] > 0) {
      auto sampled =
          sample_constraints(proj.s[i], static_cast<int>(a.soft.size()), state.sample_rng[i]);
      y_next[i] = approx_projection_step(a, z, sampled, proj.beta[i]);
    } else {
      y_next[i] = std::move(z);
    }
    g_next[i] = agent_coupling(a, y_next[i]);
  }

  for (int i = 0; i < N; ++i) {
    auto& ag = state.agents[i];
    ag.e = tracking_update(W.row(i).transpose(), e_old, g_next[i], ag.g_cached);
    ag.y = std::move(y_next[i]);
    ag.g_cached = std::move(g_next[i]);
    const double ymax = ag.y.cwiseAbs().maxCoeff();
    if (!(ymax <= cfg.divergence_bound)) {
      std::ostringstream os;
      os << "divergence guard: |y_" << i << "(" << t + 1 << ")|_inf = " << ymax << " exceeds "
         << cfg.divergence_bound;
      throw DivergenceError(os.str());
    }
  }
  state.t = t + 1;
}

EngineState iterate(const EngineState& state, const ProblemInstance& p, const RunConfig& cfg) {
  EngineState next = state;
  iterate_inplace(next, p, cfg, resolve_projection(p, cfg.projection));
  return next;
}

std::vector<std::int64_t> record_times(std::int64_t horizon, std::int64_t stride) {
  std::vector<std::int64_t> times;
  for (std::int64_t t = 0; t <= horizon; t += stride) times.push_back(t);
  if (times.back() != horizon) times.push_back(horizon);
  return times;
}

namespace {

ErgodicSnapshot snapshot(const ProblemInstance& p, const RunConfig& cfg,
                         const ErgodicAccumulator& window, std::int64_t t) {
  ErgodicSnapshot s;
  s.t = t;
  s.s = window.start();
  if (!(window.sum_gamma() > 0.0)) {
    // No step mass in the window (frozen primal): averages are undefined.
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.phi_x_tilde = s.mismatch_sq = s.global_viol_y_tilde = nan;
    return s;
  }
  auto [yt, xt] = ergodic_points(window);
  s.phi_x_tilde = penalty_objective(p, xt);
  s.mismatch_sq = (yt - xt).squaredNorm();
  s.global_viol_y_tilde = std::max(0.0, global_constraint(p, yt).maxCoeff());
  if (cfg.phi_star) s.gap = ergodic_gap(p, window, *cfg.phi_star, cfg.steps.gamma0, cfg.rho_proxy);
  s.y_tilde = std::move(yt);
  s.x_tilde = std::move(xt);
  return s;
}

}  // namespace

RunResult run(const ProblemInstance& p, const RunConfig& cfg,
              const std::function<void(const MetricsRecord&)>& on_record) {
  RunResult out;
  out.warnings = validate_run_config(p, cfg);
  const ResolvedProjection proj = resolve_projection(p, cfg.projection);
  EngineState state = init_state(p, cfg, cfg.master_seed);

  const auto times = record_times(cfg.horizon, cfg.metric_stride);
  std::vector<std::int64_t> halves;
  for (auto t : times) halves.push_back(t / 2);
  std::sort(halves.begin(), halves.end());
  halves.erase(std::unique(halves.begin(), halves.end()), halves.end());

  const std::optional<double> L = p.common_lipschitz();
  const int N = p.num_agents();
  const int K = p.num_global();
  ErgodicAccumulator running(p.total_dim(), 0);
  std::vector<std::pair<std::int64_t, ErgodicAccumulator>> prefixes;
  std::size_t next_record = 0;
  std::size_t next_half = 0;

  for (std::int64_t t = 0; t <= cfg.horizon; ++t) {
    if (next_half < halves.size() && halves[next_half] == t) {
      prefixes.emplace_back(t, running);
      ++next_half;
    }

    std::vector<Vec> ys(N), xs(N);
    for (int i = 0; i < N; ++i) {
      ys[i] = state.agents[i].y;
      xs[i] = exact_project_feasible(p.agent(i), ys[i], cfg.proj_tol);
    }
    const Vec y = p.stack(ys);
    const Vec x = p.stack(xs);
    const double gamma = cfg.steps.at(t);
    running.add(gamma, y, x);

    if (next_record < times.size() && times[next_record] == t) {
      ++next_record;
      std::vector<Vec> es(N), gs(N);
      for (int i = 0; i < N; ++i) {
        es[i] = state.agents[i].e;
        gs[i] = state.agents[i].g_cached;
      }
      MetricsRecord r;
      r.t = t;
      r.gamma = gamma;
      r.phi_y = penalty_objective(p, y);
      r.phi_proj = penalty_objective(p, x);
      r.dist_G_sq = (y - x).squaredNorm();
      r.a_t = disagreement(es);
      r.lemma1_resid = tracking_residual(es, gs);
      r.global_viol = std::max(0.0, global_constraint(p, y).maxCoeff());
      for (int i = 0; i < N; ++i)
        r.local_viol_max = std::max(r.local_viol_max, soft_violation(p.agent(i), ys[i]));
      out.records.push_back(r);
      if (on_record) on_record(r);

      if (L) {
        Vec ebar = Vec::Zero(K);
        for (const auto& e : es) ebar += e;
        ebar /= N;
        double excess = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < N; ++i) {
          Vec q = compute_q(p.agent(i), ys[i], es[i], p.mu());
          double bound =
              2.0 * *L * *L * (1.0 + p.mu() * p.mu() * K * (es[i] - ebar).squaredNorm());
          excess = std::max(excess, q.squaredNorm() - bound);
        }
        out.direction_bound_excess.push_back(excess);
      }

      const std::int64_t s = t / 2;
      auto it = std::find_if(prefixes.begin(), prefixes.end(),
                             [s](const auto& pr) { return pr.first == s; });
      out.ergodic_half.push_back(snapshot(p, cfg, running.since(it->second), t));
      out.ergodic_full.push_back(snapshot(p, cfg, running, t));
      // Prefixes older than the current half-point are no longer needed.
      prefixes.erase(prefixes.begin(), it);
    }

    if (t < cfg.horizon) iterate_inplace(state, p, cfg, proj);
  }

  std::vector<Vec> ys;
  for (const auto& ag : state.agents) ys.push_back(ag.y);
  out.final_feasibility = feasibility_report(p, p.stack(ys));
  out.final_state = std::move(state);
  return out;
}

}  // namespace distopt
