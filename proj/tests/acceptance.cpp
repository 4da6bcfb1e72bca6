// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include "distopt/engine.hpp"
#include "distopt/experiment.hpp"
#include "distopt/library.hpp"
#include "distopt/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace distopt;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] criterion %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(),
              o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Residual ‖ē − ḡ‖∞ and the scale max_i ‖g_i(y_i)‖∞, computed from fresh
// oracle evaluations rather than cached engine values.
std::pair<double, double> conservation(const ProblemInstance& p, const EngineState& s) {
  Vec ebar = Vec::Zero(p.num_global());
  Vec gbar = Vec::Zero(p.num_global());
  double gmax = 0.0;
  for (int i = 0; i < p.num_agents(); ++i) {
    Vec g(p.num_global());
    for (int k = 0; k < p.num_global(); ++k) g[k] = p.agent(i).coupling[k]->value(s.agents[i].y);
    ebar += s.agents[i].e;
    gbar += g;
    gmax = std::max(gmax, g.lpNorm<Eigen::Infinity>());
  }
  return {((ebar - gbar) / p.num_agents()).lpNorm<Eigen::Infinity>(), gmax};
}

RunConfig toy_config(std::int64_t horizon, std::int64_t stride, std::uint64_t seed, int n) {
  RunConfig cfg;
  cfg.steps = StepSizeSchedule::polynomial(0.5, 0.6);
  cfg.noise = NoiseModel::gaussian(0.1);
  cfg.projection = ProjectionPolicy::uniform(1, std::nullopt, n);
  cfg.schedule = std::make_shared<RingCycleSchedule>(n);
  cfg.horizon = horizon;
  cfg.metric_stride = stride;
  cfg.master_seed = seed;
  return cfg;
}

CoupledQuadraticParams toy_params(double mu) {
  CoupledQuadraticParams prm;
  prm.a = {6, 7, 8};
  prm.u = {5, 5, 5};
  prm.b = 9;
  prm.mu = mu;
  return prm;
}

constexpr std::int64_t kToyHorizon = 200000;
constexpr std::int64_t kToyStride = 1000;

}  // namespace

int main() {
  // Shared by criteria 4, 6, 7, 9.
  const ProblemInstance toy = make_coupled_quadratic(toy_params(10.0));
  std::optional<double> toy_phi_star;
  std::optional<RunResult> toy_run;
  std::string toy_csv;

  report(1, "constraint-average conservation", [] {
    auto t0 = Clock::now();
    double worst_ratio = 0.0;
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      ProblemInstance p = make_coupled_quadratic(5, seed);
      RunConfig cfg = toy_config(10000, 1, seed, 5);
      auto proj = resolve_projection(p, cfg.projection);
      EngineState s = init_state(p, cfg, seed);
      for (std::int64_t t = 0;; ++t) {
        auto [resid, gmax] = conservation(p, s);
        double tol = 1e-8 * (1.0 + gmax);
        worst_ratio = std::max(worst_ratio, resid / tol);
        ok = ok && resid <= tol;
        if (t == cfg.horizon) break;
        iterate_inplace(s, p, cfg, proj);
      }
    }
    double secs = seconds_since(t0);
    return Outcome{ok && secs < 5.0, "5 seeds x 1e4 steps, max residual/tolerance = " +
                                         fmt("%.3g", worst_ratio) + ", " + fmt("%.2f s", secs) +
                                         " (limit 5 s)"};
  });

  report(2, "consensus tracking decay with frozen primal", [] {
    auto t0 = Clock::now();
    ProblemInstance p = make_coupled_quadratic(5, 1);
    RunConfig cfg = toy_config(2000, 1, 1, 5);
    cfg.steps = StepSizeSchedule::constant(0.0);
    cfg.allow_nonstandard_steps = true;
    RunResult r = run(p, cfg);
    std::vector<std::pair<double, double>> series;
    for (const auto& rec : r.records)
      if (rec.a_t > 1e-24) series.emplace_back(static_cast<double>(rec.t), rec.a_t);
    DecayFit fit = geometric_fit(series);
    const double sigma = mixing_constant(5, cfg.schedule->w_min(), 5);
    const double a_T = r.records.back().a_t;
    double secs = seconds_since(t0);
    bool ok = fit.exponent <= std::log(sigma) + 0.05 && a_T <= 1e-12 && secs < 2.0;
    return Outcome{ok, "log-contraction " + fmt("%.4g", fit.exponent) + " <= log(sigma)+0.05 = " +
                           fmt("%.4g", std::log(sigma) + 0.05) + ", a_T = " + fmt("%.3g", a_T) +
                           " (<= 1e-12), " + fmt("%.2f s", secs) + " (limit 2 s)"};
  });

  report(3, "single-agent reduction to centralized projected subgradient", [] {
    // phi(y) = (y1-3)^2 + 2(y2+1)^2, couplings y1+y2-1 and y1-y2-0.5, box [-2,2]^2.
    const double mu = 5.0;
    Mat P(2, 2);
    P << 2, 0, 0, 4;
    Vec q(2);
    q << -6, 4;
    AgentSpec ag;
    ag.dim = 2;
    ag.objective = quadratic(P, q, 11.0);
    ag.coupling = {affine(Vec{{1.0, 1.0}}, -1.0), affine(Vec{{1.0, -1.0}}, -0.5)};
    ag.hard_set = SimpleSet::box(2, -2.0, 2.0);
    ProblemInstance p({ag}, 2, mu);

    RunConfig cfg;
    cfg.steps = StepSizeSchedule::polynomial(0.5, 0.6);
    cfg.noise = NoiseModel::none();
    cfg.schedule = make_identity_schedule(1);
    cfg.horizon = 1000;
    auto proj = resolve_projection(p, cfg.projection);
    EngineState s = init_state(p, cfg, 3);

    Vec y = s.agents[0].y;
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const double g1 = std::max(0.0, y[0] + y[1] - 1.0);
      const double g2 = std::max(0.0, y[0] - y[1] - 0.5);
      Vec grad(2);
      grad[0] = 2.0 * (y[0] - 3.0) + mu * (g1 + g2);
      grad[1] = 4.0 * (y[1] + 1.0) + mu * (g1 - g2);
      const double gamma = 0.5 * std::pow(t + 1.0, -0.6);
      y = (y - gamma * grad).cwiseMax(-2.0).cwiseMin(2.0);
      iterate_inplace(s, p, cfg, proj);
      worst = std::max(worst, (s.agents[0].y - y).lpNorm<Eigen::Infinity>());
    }
    return Outcome{worst <= 1e-12, "max per-iterate deviation over 1e3 steps = " +
                                       fmt("%.3g", worst) + " (<= 1e-12)"};
  });

  report(4, "convergence to the centralized optimum", [&] {
    auto t0 = Clock::now();
    OracleSolution sol = solve_central(toy, 1e-8, 3);
    GridResult grid = grid_oracle(toy, 300);
    const double agree = std::abs(grid.phi_min - sol.phi_star);
    toy_phi_star = sol.phi_star;

    RunConfig cfg = toy_config(kToyHorizon, kToyStride, 1, 3);
    cfg.phi_star = sol.phi_star;
    toy_run = run(toy, cfg);
    toy_csv = metrics_csv(toy_run->records);
    const double gap = *toy_run->ergodic_half.back().gap;
    const double gap_tol = 5e-2 * (1.0 + std::abs(sol.phi_star));
    const double dist = toy_run->records.back().dist_G_sq;
    const double a_T = toy_run->records.back().a_t;
    double secs = seconds_since(t0);
    bool ok = agree <= 1e-4 && gap <= gap_tol && dist <= 1e-4 && a_T <= 1e-6 && secs < 60.0;
    return Outcome{ok, "phi* = " + fmt("%.10g", sol.phi_star) + " (grid agreement " +
                           fmt("%.2g", agree) + "), gap = " + fmt("%.3g", gap) + " <= " +
                           fmt("%.3g", gap_tol) + ", dist^2 = " + fmt("%.3g", dist) +
                           ", a_T = " + fmt("%.3g", a_T) + ", " + fmt("%.2f s", secs) +
                           " (limit 60 s)"};
  });

  report(5, "ergodic gap rate under 1/sqrt(t) steps", [&] {
    if (!toy_phi_star) return Outcome{false, "no oracle value (criterion 4 failed early)"};
    const std::vector<std::int64_t> times{1000, 4000, 16000, 64000};
    std::vector<double> mean_gap(times.size(), 0.0);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      RunConfig cfg = toy_config(64000, 1000, seed, 3);
      cfg.steps = StepSizeSchedule::polynomial(0.5, 0.5);
      cfg.allow_nonstandard_steps = true;
      cfg.phi_star = toy_phi_star;
      RunResult r = run(toy, cfg);
      for (std::size_t j = 0; j < times.size(); ++j)
        for (const auto& snap : r.ergodic_half)
          if (snap.t == times[j]) mean_gap[j] += *snap.gap / 5.0;
    }
    std::vector<std::pair<double, double>> series;
    std::string gaps;
    for (std::size_t j = 0; j < times.size(); ++j) {
      series.emplace_back(static_cast<double>(times[j]), mean_gap[j]);
      gaps += (j ? ", " : "") + fmt("%.3g", mean_gap[j]);
    }
    DecayFit fit = decay_fit(series);
    bool ok = fit.used == static_cast<int>(times.size()) && fit.exponent >= -1.0 &&
              fit.exponent <= -0.25;
    return Outcome{ok, "mean gaps [" + gaps + "], fitted exponent " + fmt("%.3f", fit.exponent) +
                           " in [-1, -0.25]"};
  });

  report(6, "global violation nonincreasing in the penalty weight", [] {
    std::vector<double> viol;
    for (double mu : {1.0, 10.0, 100.0}) {
      ProblemInstance p = make_coupled_quadratic(toy_params(mu));
      double sum = 0.0;
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        RunResult r = run(p, toy_config(kToyHorizon, kToyStride, seed, 3));
        sum += r.ergodic_half.back().global_viol_y_tilde;
      }
      viol.push_back(sum / 3.0);
    }
    bool ok = viol[1] <= viol[0] && viol[2] <= viol[1];
    return Outcome{ok, "mean violation at mu = 1, 10, 100: " + fmt("%.4g", viol[0]) + ", " +
                           fmt("%.4g", viol[1]) + ", " + fmt("%.4g", viol[2])};
  });

  report(7, "local direction bound", [&] {
    if (!toy_run) return Outcome{false, "criterion 4 run unavailable"};
    // Replays the criterion-4 run and evaluates the bound from the oracles.
    RunConfig cfg = toy_config(kToyHorizon, kToyStride, 1, 3);
    auto proj = resolve_projection(toy, cfg.projection);
    EngineState s = init_state(toy, cfg, cfg.master_seed);
    const double L = *toy.common_lipschitz();
    const double mu = toy.mu();
    const int K = toy.num_global();
    double worst = -1e300;
    for (std::int64_t t = 0;; ++t) {
      if (t % kToyStride == 0 || t == kToyHorizon) {
        Vec ebar = Vec::Zero(K);
        for (const auto& a : s.agents) ebar += a.e;
        ebar /= toy.num_agents();
        for (int i = 0; i < toy.num_agents(); ++i) {
          const auto& ag = toy.agent(i);
          const Vec& y = s.agents[i].y;
          Vec qi = ag.objective->subgradient(y);
          for (int k = 0; k < K; ++k)
            qi += mu * std::max(0.0, s.agents[i].e[k]) * ag.coupling[k]->subgradient(y);
          double bound = 2.0 * L * L * (1.0 + mu * mu * K * (s.agents[i].e - ebar).squaredNorm());
          worst = std::max(worst, qi.squaredNorm() - bound);
        }
      }
      if (t == kToyHorizon) break;
      iterate_inplace(s, toy, cfg, proj);
    }
    double replay_dev = 0.0;
    for (int i = 0; i < toy.num_agents(); ++i)
      replay_dev = std::max(replay_dev, (s.agents[i].y - toy_run->final_state.agents[i].y).norm());
    bool ok = worst <= 1e-6 && replay_dev == 0.0;
    return Outcome{ok, "max(|q_i|^2 - bound) = " + fmt("%.4g", worst) + " (<= 1e-6), L = " +
                           fmt("%.4g", L) + ", replay matches run: " +
                           (replay_dev == 0.0 ? "yes" : "no")};
  });

  report(8, "assumption validator", [] {
    std::ostringstream sink;
    std::string detail;
    bool ok = true;
    for (const auto& name : recipe_names()) {
      ExperimentConfig c;
      c.problem.name = name;
      int rc = cmd_validate(c, sink);
      ok = ok && rc == 0;
      detail += name + (rc == 0 ? " ok; " : " REJECTED; ");
    }
    struct Fixture {
      std::string label;
      std::function<void(ExperimentConfig&)> apply;
      std::string assumption;
      std::string check_fragment;
    };
    const std::vector<Fixture> fixtures{
        {"non-doubly-stochastic W",
         [](ExperimentConfig& c) {
           c.problem.n = 2;
           c.schedule.family = "matrix";
           c.schedule.matrix = "0.9,0.1;0.5,0.5";
         },
         "Assumption 3", "doubly stochastic"},
        {"disconnected schedule",
         [](ExperimentConfig& c) {
           c.schedule.family = "metropolis";
           c.schedule.graph = "edges";
           c.schedule.edges = "0-1";
         },
         "Assumption 3", "connected"},
        {"concave objective",
         [](ExperimentConfig& c) { c.problem.inject_concave = true; },
         "Assumption 1-b", "convex"},
    };
    for (const auto& f : fixtures) {
      ExperimentConfig c;
      f.apply(c);
      ProblemInstance p = build_problem(c);
      RunConfig rc = build_run_config(c, build_schedule(c.schedule, p.num_agents()));
      ValidateOptions opts;
      auto rep = validate_setup(p, rc, opts);
      auto fails = rep.failures();
      bool named = std::any_of(fails.begin(), fails.end(), [&](const ValidationEntry& e) {
        return e.assumption == f.assumption && e.check.find(f.check_fragment) != std::string::npos;
      });
      bool exit_fail = cmd_validate(c, sink) != 0;
      ok = ok && named && exit_fail;
      detail += f.label + (named && exit_fail ? " -> " + f.assumption + "; " : " NOT FLAGGED; ");
    }
    return Outcome{ok, detail};
  });

  report(9, "determinism", [&] {
    if (!toy_run) return Outcome{false, "criterion 4 run unavailable"};
    RunConfig cfg = toy_config(kToyHorizon, kToyStride, 1, 3);
    cfg.phi_star = toy_phi_star;
    std::string again = metrics_csv(run(toy, cfg).records);
    bool same = again == toy_csv;
    return Outcome{same, same ? "repeated run CSV byte-identical (" +
                                    std::to_string(toy_csv.size()) + " bytes)"
                              : "CSV differs between identical runs"};
  });

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
