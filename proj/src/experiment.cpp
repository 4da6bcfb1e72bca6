#include "distopt/experiment.hpp"

#include "distopt/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace distopt {

// ---------------------------------------------------------------------------
// Config text
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& v) {
  std::size_t pos = 0;
  double d = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return d;
}

long long to_int(const std::string& v) {
  long long x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("not an integer");
  return x;
}

std::uint64_t to_uint(const std::string& v) {
  std::uint64_t x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw std::invalid_argument("not a nonnegative integer");
  return x;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("not a boolean");
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v, ',')) out.push_back(to_double(item));
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v[i]);
  }
  return s;
}

struct Key {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<Key>& keys() {
  using C = ExperimentConfig;
  static const std::vector<Key> table{
      {"problem", [](C& c, const std::string& v) { c.problem.name = v; },
       [](const C& c) { return c.problem.name; }},
      {"problem.N", [](C& c, const std::string& v) { c.problem.n = static_cast<int>(to_int(v)); },
       [](const C& c) { return std::to_string(c.problem.n); }},
      {"problem.K", [](C& c, const std::string& v) { c.problem.k = static_cast<int>(to_int(v)); },
       [](const C& c) { return std::to_string(c.problem.k); }},
      {"problem.m", [](C& c, const std::string& v) { c.problem.m = static_cast<int>(to_int(v)); },
       [](const C& c) { return std::to_string(c.problem.m); }},
      {"problem.seed", [](C& c, const std::string& v) { c.problem.seed = to_uint(v); },
       [](const C& c) { return std::to_string(c.problem.seed); }},
      {"problem.mu", [](C& c, const std::string& v) { c.problem.mu = to_double(v); },
       [](const C& c) { return format_double(c.problem.mu); }},
      {"problem.a",
       [](C& c, const std::string& v) {
         if (v.empty()) c.problem.a.reset(); else c.problem.a = to_list(v);
       },
       [](const C& c) { return c.problem.a ? list_text(*c.problem.a) : std::string(); }},
      {"problem.u",
       [](C& c, const std::string& v) {
         if (v.empty()) c.problem.u.reset(); else c.problem.u = to_list(v);
       },
       [](const C& c) { return c.problem.u ? list_text(*c.problem.u) : std::string(); }},
      {"problem.b",
       [](C& c, const std::string& v) {
         if (v.empty()) c.problem.b.reset(); else c.problem.b = to_double(v);
       },
       [](const C& c) { return c.problem.b ? format_double(*c.problem.b) : std::string(); }},
      {"problem.capacity_factor",
       [](C& c, const std::string& v) { c.problem.capacity_factor = to_double(v); },
       [](const C& c) { return format_double(c.problem.capacity_factor); }},
      {"problem.zero_demand", [](C& c, const std::string& v) { c.problem.zero_demand = to_bool(v); },
       [](const C& c) { return std::string(c.problem.zero_demand ? "true" : "false"); }},
      {"problem.inject_concave",
       [](C& c, const std::string& v) { c.problem.inject_concave = to_bool(v); },
       [](const C& c) { return std::string(c.problem.inject_concave ? "true" : "false"); }},
      {"schedule", [](C& c, const std::string& v) { c.schedule.family = v; },
       [](const C& c) { return c.schedule.family; }},
      {"schedule.graph", [](C& c, const std::string& v) { c.schedule.graph = v; },
       [](const C& c) { return c.schedule.graph; }},
      {"schedule.edges", [](C& c, const std::string& v) { c.schedule.edges = v; },
       [](const C& c) { return c.schedule.edges; }},
      {"schedule.matrix", [](C& c, const std::string& v) { c.schedule.matrix = v; },
       [](const C& c) { return c.schedule.matrix; }},
      {"schedule.Q", [](C& c, const std::string& v) { c.schedule.q = static_cast<int>(to_int(v)); },
       [](const C& c) { return std::to_string(c.schedule.q); }},
      {"schedule.seed", [](C& c, const std::string& v) { c.schedule.seed = to_uint(v); },
       [](const C& c) { return std::to_string(c.schedule.seed); }},
      {"steps.form", [](C& c, const std::string& v) { c.step_form = v; },
       [](const C& c) { return c.step_form; }},
      {"steps.gamma0", [](C& c, const std::string& v) { c.gamma0 = to_double(v); },
       [](const C& c) { return format_double(c.gamma0); }},
      {"steps.alpha", [](C& c, const std::string& v) { c.alpha = to_double(v); },
       [](const C& c) { return format_double(c.alpha); }},
      {"noise.kind", [](C& c, const std::string& v) { c.noise_kind = v; },
       [](const C& c) { return c.noise_kind; }},
      {"noise.std", [](C& c, const std::string& v) { c.noise_std = to_double(v); },
       [](const C& c) { return format_double(c.noise_std); }},
      {"projection.s",
       [](C& c, const std::string& v) {
         if (v.empty()) c.proj_s.reset(); else c.proj_s = static_cast<int>(to_int(v));
       },
       [](const C& c) { return c.proj_s ? std::to_string(*c.proj_s) : std::string(); }},
      {"projection.beta",
       [](C& c, const std::string& v) {
         if (v.empty()) c.proj_beta.reset(); else c.proj_beta = to_double(v);
       },
       [](const C& c) { return c.proj_beta ? format_double(*c.proj_beta) : std::string(); }},
      {"horizon", [](C& c, const std::string& v) { c.horizon = to_int(v); },
       [](const C& c) { return std::to_string(c.horizon); }},
      {"metric_stride", [](C& c, const std::string& v) { c.metric_stride = to_int(v); },
       [](const C& c) { return std::to_string(c.metric_stride); }},
      {"master_seed", [](C& c, const std::string& v) { c.master_seed = to_uint(v); },
       [](const C& c) { return std::to_string(c.master_seed); }},
      {"init_scale", [](C& c, const std::string& v) { c.init_scale = to_double(v); },
       [](const C& c) { return format_double(c.init_scale); }},
      {"output", [](C& c, const std::string& v) { c.output = v; },
       [](const C& c) { return c.output; }},
      {"oracle_file", [](C& c, const std::string& v) { c.oracle_file = v; },
       [](const C& c) { return c.oracle_file; }},
      {"allow_nonstandard_steps",
       [](C& c, const std::string& v) { c.allow_nonstandard_steps = to_bool(v); },
       [](const C& c) { return std::string(c.allow_nonstandard_steps ? "true" : "false"); }},
      {"oracle.tol", [](C& c, const std::string& v) { c.oracle_tol = to_double(v); },
       [](const C& c) { return format_double(c.oracle_tol); }},
      {"oracle.restarts",
       [](C& c, const std::string& v) { c.oracle_restarts = static_cast<int>(to_int(v)); },
       [](const C& c) { return std::to_string(c.oracle_restarts); }},
      {"oracle.grid_resolution",
       [](C& c, const std::string& v) { c.oracle_grid_resolution = static_cast<int>(to_int(v)); },
       [](const C& c) { return std::to_string(c.oracle_grid_resolution); }},
      {"oracle.gamma0", [](C& c, const std::string& v) { c.oracle_gamma0 = to_double(v); },
       [](const C& c) { return format_double(c.oracle_gamma0); }},
      {"validate.samples",
       [](C& c, const std::string& v) { c.validate_samples = static_cast<int>(to_int(v)); },
       [](const C& c) { return std::to_string(c.validate_samples); }},
      {"validate.horizon", [](C& c, const std::string& v) { c.validate_horizon = to_int(v); },
       [](const C& c) { return std::to_string(c.validate_horizon); }},
  };
  return table;
}

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (const auto& e : items) s += "\n  " + e;
  return s;
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return to_config_text(*this) == to_config_text(o);
}

ConfigParseError::ConfigParseError(std::vector<std::string> errors)
    : ConfigError("invalid configuration:" + join(errors)), errors_(std::move(errors)) {}

std::vector<std::string> config_violations(const ExperimentConfig& c) {
  std::vector<std::string> err;
  const auto& names = recipe_names();
  if (std::find(names.begin(), names.end(), c.problem.name) == names.end())
    err.push_back("problem: unknown recipe '" + c.problem.name + "'");
  if (c.problem.n < 1) err.push_back("problem.N must be >= 1");
  if (c.problem.k < 1) err.push_back("problem.K must be >= 1 (at least one coupling constraint)");
  if (c.problem.name == "many_soft" && c.problem.m < 10) err.push_back("problem.m must be >= 10");
  if (!(c.problem.mu > 0.0)) err.push_back("problem.mu: penalty parameter must be > 0");
  if (c.problem.a && static_cast<int>(c.problem.a->size()) != c.problem.n)
    err.push_back("problem.a must have N entries");
  if (c.problem.u && static_cast<int>(c.problem.u->size()) != c.problem.n)
    err.push_back("problem.u must have N entries");

  static const std::vector<std::string> families{"ring", "metropolis", "gossip", "identity",
                                                 "matrix"};
  if (std::find(families.begin(), families.end(), c.schedule.family) == families.end())
    err.push_back("schedule: unknown family '" + c.schedule.family + "'");
  static const std::vector<std::string> graphs{"ring", "complete", "star", "path", "edges"};
  if (std::find(graphs.begin(), graphs.end(), c.schedule.graph) == graphs.end())
    err.push_back("schedule.graph: unknown topology '" + c.schedule.graph + "'");
  if (c.schedule.q < 0) err.push_back("schedule.Q must be >= 1 (0 selects the family default)");

  if (c.step_form != "polynomial" && c.step_form != "constant")
    err.push_back("steps.form must be 'polynomial' or 'constant'");
  if (!c.allow_nonstandard_steps) {
    if (c.step_form == "constant")
      err.push_back("Assumption 4: constant step sizes are not square-summable");
    else if (!(c.alpha > 0.5 && c.alpha <= 1.0))
      err.push_back("Assumption 4: alpha must be in (0.5, 1]");
    if (!(c.gamma0 > 0.0)) err.push_back("Assumption 4: gamma0 must be > 0");
  } else if (!(c.gamma0 >= 0.0)) {
    err.push_back("steps.gamma0 must be >= 0");
  }

  if (c.noise_kind != "none" && c.noise_kind != "gaussian")
    err.push_back("noise.kind must be 'none' or 'gaussian'");
  if (!(c.noise_std >= 0.0)) err.push_back("noise.std must be >= 0");

  const int s = c.proj_s.value_or(1);
  if (s < 1) err.push_back("projection.s must be >= 1");
  if (c.proj_beta && !(*c.proj_beta > 0.0 && *c.proj_beta * s < 2.0))
    err.push_back("projection.beta must lie in the open interval (0, 2/s)");

  if (c.horizon < 0) err.push_back("horizon must be >= 0");
  if (c.metric_stride < 1) err.push_back("metric_stride must be >= 1");
  if (!(c.init_scale >= 0.0)) err.push_back("init_scale must be >= 0");
  if (!(c.oracle_tol > 0.0)) err.push_back("oracle.tol must be > 0");
  if (c.oracle_restarts < 1) err.push_back("oracle.restarts must be >= 1");
  if (c.oracle_grid_resolution < 1) err.push_back("oracle.grid_resolution must be >= 1");
  if (c.validate_samples < 1) err.push_back("validate.samples must be >= 1");
  if (c.validate_horizon < 1) err.push_back("validate.horizon must be >= 1");
  return err;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::vector<std::string> errors;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    const auto& table = keys();
    auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
    if (it == table.end()) {
      errors.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      continue;
    }
    try {
      it->set(cfg, value);
    } catch (const std::exception&) {
      errors.push_back("line " + std::to_string(lineno) + ": bad value '" + value + "' for key '" +
                       key + "'");
    }
  }
  for (auto& e : config_violations(cfg)) errors.push_back(std::move(e));
  if (!errors.empty()) throw ConfigParseError(std::move(errors));
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string to_config_text(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

ProblemInstance build_problem(const ExperimentConfig& cfg) { return make_recipe(cfg.problem); }

namespace {

std::vector<Edge> parse_edges(const std::string& text) {
  std::vector<Edge> edges;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) continue;
    auto dash = item.find('-');
    if (dash == std::string::npos) throw ConfigError("schedule.edges: expected 'i-j', got '" + item + "'");
    edges.emplace_back(static_cast<int>(to_int(trim(item.substr(0, dash)))),
                       static_cast<int>(to_int(trim(item.substr(dash + 1)))));
  }
  return edges;
}

WeightMatrix parse_matrix(const std::string& text, int n) {
  auto rows = split(text, ';');
  if (static_cast<int>(rows.size()) != n)
    throw ConfigError("schedule.matrix: expected " + std::to_string(n) + " rows");
  WeightMatrix W(n, n);
  for (int i = 0; i < n; ++i) {
    auto vals = to_list(rows[i]);
    if (static_cast<int>(vals.size()) != n)
      throw ConfigError("schedule.matrix: row " + std::to_string(i) + " needs " +
                        std::to_string(n) + " entries");
    for (int j = 0; j < n; ++j) W(i, j) = vals[j];
  }
  return W;
}

}  // namespace

SchedulePtr build_schedule(const ScheduleSpec& spec, int n) {
  if (spec.family == "ring") {
    if (spec.q > 0 && spec.q != n) {
      // A non-default Q is a claim to be validated, not a different schedule.
      auto ring = std::make_shared<RingCycleSchedule>(n);
      return std::make_shared<FunctionSchedule>(
          n, [ring](std::int64_t t) { return ring->weights_at(t); }, ring->w_min(), spec.q, "ring");
    }
    return std::make_shared<RingCycleSchedule>(n);
  }
  if (spec.family == "metropolis") {
    std::vector<Edge> edges;
    if (spec.graph == "ring") edges = graph_ring(n);
    else if (spec.graph == "complete") edges = graph_complete(n);
    else if (spec.graph == "star") edges = graph_star(n);
    else if (spec.graph == "path") edges = graph_path(n);
    else edges = parse_edges(spec.edges);
    return std::make_shared<StaticSchedule>(metropolis_weights(n, edges), std::max(1, spec.q),
                                            "metropolis");
  }
  if (spec.family == "gossip")
    return std::make_shared<PairwiseGossipSchedule>(n, spec.seed, spec.q > 0 ? spec.q : 10 * n);
  if (spec.family == "identity")
    return std::make_shared<StaticSchedule>(WeightMatrix::Identity(n, n), std::max(1, spec.q),
                                            "identity");
  if (spec.family == "matrix")
    return std::make_shared<StaticSchedule>(parse_matrix(spec.matrix, n), std::max(1, spec.q),
                                            "matrix");
  throw ConfigError("unknown schedule family '" + spec.family + "'");
}

RunConfig build_run_config(const ExperimentConfig& cfg, SchedulePtr schedule) {
  RunConfig rc;
  rc.steps = cfg.step_form == "constant" ? StepSizeSchedule::constant(cfg.gamma0)
                                         : StepSizeSchedule::polynomial(cfg.gamma0, cfg.alpha);
  rc.noise = cfg.noise_kind == "gaussian" ? NoiseModel::gaussian(cfg.noise_std) : NoiseModel::none();
  rc.projection = ProjectionPolicy::uniform(cfg.proj_s, cfg.proj_beta, cfg.problem.n);
  rc.schedule = std::move(schedule);
  rc.horizon = cfg.horizon;
  rc.metric_stride = cfg.metric_stride;
  rc.master_seed = cfg.master_seed;
  rc.init_scale = cfg.init_scale;
  rc.allow_nonstandard_steps = cfg.allow_nonstandard_steps;
  return rc;
}

void write_oracle_sidecar(const std::string& path, const OracleSolution& sol) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write oracle sidecar '" + path + "'");
  out << "phi_star = " << format_double(sol.phi_star) << "\n";
  out << "y_star = ";
  for (Eigen::Index i = 0; i < sol.y_star.size(); ++i)
    out << (i ? "," : "") << format_double(sol.y_star[i]);
  out << "\n";
  out << "restart_spread = " << format_double(sol.certificate.restart_spread) << "\n";
}

std::optional<OracleSidecar> read_oracle_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  OracleSidecar sc;
  bool have_phi = false;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "phi_star") {
      sc.phi_star = to_double(value);
      have_phi = true;
    } else if (key == "y_star") {
      auto v = to_list(value);
      sc.y_star = Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
  }
  if (!have_phi) throw ConfigError("oracle sidecar '" + path + "' has no phi_star");
  return sc;
}

std::string metrics_csv(const std::vector<MetricsRecord>& records) {
  std::string s = csv_header() + "\n";
  for (const auto& r : records) s += csv_row(r) + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

bool ValidationReport::pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

std::vector<ValidationEntry> ValidationReport::failures() const {
  std::vector<ValidationEntry> out;
  for (const auto& e : entries)
    if (!e.pass) out.push_back(e);
  return out;
}

namespace {

std::string vec_text(const Vec& v) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

}  // namespace

ValidationReport validate_setup(const ProblemInstance& p, const RunConfig& cfg,
                                const ValidateOptions& opts) {
  ValidationReport rep;

  // Assumption 1-a: every local set G_i is nonempty.
  {
    ValidationEntry e{"Assumption 1-a", "local sets nonempty", true, ""};
    Rng rng = make_stream(opts.seed, 0x1A, 0);
    for (int i = 0; i < p.num_agents() && e.pass; ++i) {
      try {
        Vec x = p.agent(i).hard_set.sample(rng);
        exact_project_feasible(p.agent(i), x, 1e-8, 20000);
      } catch (const InfeasibleError& err) {
        e.pass = false;
        e.detail = "agent " + std::to_string(i) + ": " + err.what();
      }
    }
    rep.entries.push_back(e);
  }

  // Assumption 1-b / 1-c: convexity and Lipschitz bounds by sampling.
  {
    auto orc = validate_oracles(p, opts.samples, opts.seed);
    ValidationEntry b{"Assumption 1-b", "objective and coupling oracles convex/Lipschitz", true, ""};
    ValidationEntry c{"Assumption 1-c", "soft constraint oracles convex/Lipschitz", true, ""};
    for (const auto& v : orc.violations) {
      ValidationEntry& e = v.function.rfind("c[", 0) == 0 ? c : b;
      if (!e.pass) continue;
      e.pass = false;
      std::ostringstream os;
      os << (v.agent >= 0 ? "agent " + std::to_string(v.agent) + " " : std::string()) << v.function
         << ": " << v.kind << " violated by " << v.amount << " at witness x=" << vec_text(v.x)
         << " y=" << vec_text(v.y);
      e.detail = os.str();
    }
    if (b.pass) b.detail = std::to_string(orc.checks) + " sampled pairs";
    rep.entries.push_back(b);
    rep.entries.push_back(c);
  }

  // Assumption 2: zero-mean noise at a sampled state of each agent.
  {
    ValidationEntry e{"Assumption 2", "noise is zero-mean", true, ""};
    if (cfg.noise.kind != NoiseModel::Kind::None) {
      Rng pick = make_stream(opts.seed, 0x2A, 0);
      for (int i = 0; i < p.num_agents() && e.pass; ++i) {
        Vec y = p.agent(i).hard_set.sample(pick);
        Rng rng = make_stream(opts.seed, 0x2B, static_cast<std::uint64_t>(i));
        Vec mean = Vec::Zero(y.size());
        for (int d = 0; d < opts.noise_draws; ++d) mean += cfg.noise.draw(i, y, rng);
        mean /= opts.noise_draws;
        double std = cfg.noise.kind == NoiseModel::Kind::Gaussian
                         ? cfg.noise.std
                         : std::sqrt(cfg.noise.variance_bound.value_or(1.0) / y.size());
        double bound = 5.0 * std / std::sqrt(static_cast<double>(opts.noise_draws)) *
                       std::sqrt(static_cast<double>(y.size()));
        if (mean.norm() > bound) {
          e.pass = false;
          std::ostringstream os;
          os << "agent " << i << ": sample mean norm " << mean.norm() << " > " << bound;
          e.detail = os.str();
        }
      }
    } else {
      e.detail = "no noise";
    }
    rep.entries.push_back(e);
  }

  // Assumption 3: doubly stochastic, w_min floor, Q-strong connectivity.
  {
    ValidationEntry ds{"Assumption 3", "W(t) doubly stochastic with weights >= w_min", true, ""};
    ValidationEntry qc{"Assumption 3", "Q-strongly connected", true, ""};
    if (!cfg.schedule || cfg.schedule->n_agents() != p.num_agents()) {
      ds.pass = qc.pass = false;
      ds.detail = qc.detail = "schedule missing or sized for a different number of agents";
    } else {
      const auto& s = *cfg.schedule;
      for (std::int64_t t = 0; t < opts.horizon && ds.pass; ++t) {
        auto r = check_doubly_stochastic(s.weights_at(t), 1e-9);
        std::ostringstream os;
        if (!r.pass) {
          os << "W(" << t << "): row-sum deviation " << r.max_row_dev << ", column sums "
             << vec_text(r.col_sums);
          ds.pass = false;
        } else if (!(s.w_min() > 0.0) || r.min_nonzero < s.w_min() * (1.0 - 1e-12)) {
          os << "W(" << t << "): nonzero weight " << r.min_nonzero << " below w_min " << s.w_min();
          ds.pass = false;
        }
        ds.detail = os.str();
      }
      const int Q = s.q_period();
      if (opts.horizon < Q) {
        qc.pass = false;
        qc.detail = "horizon shorter than Q";
      } else {
        auto c = check_q_connectivity(s, Q, opts.horizon);
        qc.pass = c.pass;
        std::ostringstream os;
        os << "Q = " << Q;
        if (c.first_failing_window) os << ", first disconnected window starts at t = " << *c.first_failing_window;
        else os << ", " << c.windows_checked << " windows";
        qc.detail = os.str();
      }
    }
    rep.entries.push_back(ds);
    rep.entries.push_back(qc);
  }

  // Assumption 4: step sizes.
  {
    ValidationEntry e{"Assumption 4", "step sizes " + cfg.steps.describe(), cfg.steps.satisfies_assumption4(), ""};
    if (!e.pass) e.detail = "need gamma_t = gamma0*(t+1)^-alpha with gamma0 > 0, alpha in (0.5, 1]";
    rep.entries.push_back(e);
  }

  // Sampling policy: 1 <= s_i <= |K_i|, beta_i in (0, 2/s_i).
  {
    ValidationEntry e{"Projection policy", "s_i and beta_i admissible", true, ""};
    try {
      resolve_projection(p, cfg.projection);
    } catch (const ConfigError& err) {
      e.pass = false;
      e.detail = err.what();
    }
    rep.entries.push_back(e);
  }
  return rep;
}

void print_validation(const ValidationReport& rep, std::ostream& out) {
  for (const auto& e : rep.entries) {
    out << (e.pass ? "PASS " : "FAIL ") << e.assumption << ": " << e.check;
    if (!e.detail.empty()) out << " [" << e.detail << "]";
    out << "\n";
  }
  out << (rep.pass() ? "all assumptions pass\n" : "assumption check FAILED\n");
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

namespace {

std::string sidecar_path(const ExperimentConfig& cfg) {
  return cfg.oracle_file.empty() ? cfg.output + ".oracle" : cfg.oracle_file;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

template <class F>
int guarded(std::ostream& out, F&& body) {
  try {
    return body();
  } catch (const AssumptionError& e) {
    out << "error: " << e.what() << "\n";
    return 3;
  } catch (const DivergenceError& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    out << "error: fatal model error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  } catch (const OracleError& e) {
    out << "error: " << e.what() << "\n";
    return 4;
  } catch (const ConfigError& e) {
    out << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int cmd_run(const ExperimentConfig& cfg, std::ostream& out) {
  return guarded(out, [&] {
    ProblemInstance p = build_problem(cfg);
    RunConfig rc = build_run_config(cfg, build_schedule(cfg.schedule, p.num_agents()));
    if (auto sc = read_oracle_sidecar(sidecar_path(cfg))) rc.phi_star = sc->phi_star;

    RunResult res = run(p, rc);
    write_file(cfg.output, metrics_csv(res.records));

    for (const auto& w : res.warnings) out << "warning: " << w << "\n";
    const auto& last = res.records.back();
    out << "run: T = " << cfg.horizon << ", " << res.records.size() << " rows -> " << cfg.output << "\n";
    out << "final phi(y) = " << format_double(last.phi_y) << "\n";
    out << "final a_t = " << format_double(last.a_t) << "\n";
    out << "final lemma1 residual = " << format_double(last.lemma1_resid) << "\n";
    const auto& f = res.final_feasibility;
    out << "feasibility: global violation " << format_double(f.global_violation)
        << ", max soft violation " << format_double(f.max_soft_violation())
        << ", max hard distance " << format_double(f.max_hard_distance())
        << (f.feasible ? " (feasible)" : " (infeasible)") << "\n";
    const auto& half = res.ergodic_half.back();
    out << "ergodic window [" << half.s << ", " << half.t << "]: phi(x~) = "
        << format_double(half.phi_x_tilde) << ", |y~ - x~|^2 = " << format_double(half.mismatch_sq)
        << ", global violation of y~ = " << format_double(half.global_viol_y_tilde) << "\n";
    if (half.gap) out << "ergodic gap = " << format_double(*half.gap) << " (phi* = " << format_double(*rc.phi_star) << ")\n";
    if (!res.direction_bound_excess.empty())
      out << "direction bound max excess = "
          << format_double(*std::max_element(res.direction_bound_excess.begin(), res.direction_bound_excess.end()))
          << "\n";
    return 0;
  });
}

int cmd_validate(const ExperimentConfig& cfg, std::ostream& out) {
  return guarded(out, [&] {
    ProblemInstance p = build_problem(cfg);
    RunConfig rc = build_run_config(cfg, build_schedule(cfg.schedule, p.num_agents()));
    ValidateOptions opts;
    opts.samples = cfg.validate_samples;
    opts.horizon = cfg.validate_horizon;
    auto rep = validate_setup(p, rc, opts);
    print_validation(rep, out);
    return rep.pass() ? 0 : 1;
  });
}

int cmd_oracle(const ExperimentConfig& cfg, std::ostream& out) {
  return guarded(out, [&] {
    ProblemInstance p = build_problem(cfg);
    CentralOptions co;
    co.gamma0 = cfg.oracle_gamma0;
    OracleSolution sol = solve_central(p, cfg.oracle_tol, cfg.oracle_restarts, co);
    out << "oracle: phi* = " << format_double(sol.phi_star) << "\n";
    out << "  y* = ";
    for (Eigen::Index i = 0; i < sol.y_star.size(); ++i)
      out << (i ? ", " : "") << format_double(sol.y_star[i]);
    out << "\n  restart values:";
    for (double v : sol.certificate.restart_values) out << " " << format_double(v);
    out << "\n  restart spread = " << sol.certificate.restart_spread
        << "\n  final step norm = " << sol.certificate.final_step_norm
        << "\n  feasibility residual = " << sol.certificate.feasibility_residual
        << "\n  iterations = " << sol.certificate.iterations
        << "\n  converged = " << (sol.certificate.converged ? "yes" : "no") << "\n";

    std::string grid_part;
    bool boxes = std::all_of(p.agents().begin(), p.agents().end(),
                             [](const AgentSpec& a) { return a.hard_set.as_box().has_value(); });
    if (p.total_dim() <= 3 && boxes) {
      GridResult g = grid_oracle(p, cfg.oracle_grid_resolution);
      out << "  grid cross-check (resolution " << cfg.oracle_grid_resolution
          << "): phi = " << format_double(g.phi_min)
          << ", |diff| = " << std::abs(g.phi_min - sol.phi_star) << ", bound = " << g.error_bound
          << "\n";
      grid_part = " grid_phi=" + format_double(g.phi_min) +
                  " grid_diff=" + format_double(std::abs(g.phi_min - sol.phi_star));
    }
    const std::string path = sidecar_path(cfg);
    write_oracle_sidecar(path, sol);
    out << "ORACLE phi_star=" << format_double(sol.phi_star)
        << " spread=" << format_double(sol.certificate.restart_spread)
        << " converged=" << (sol.certificate.converged ? 1 : 0) << grid_part
        << " sidecar=" << path << "\n";
    return 0;
  });
}

const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> axes{"mu", "gamma0", "alpha", "noise_std", "s_i", "N",
                                             "seed"};
  return axes;
}

ExperimentConfig apply_axis(const ExperimentConfig& cfg, const std::string& axis,
                            const std::string& value) {
  ExperimentConfig c = cfg;
  try {
    if (axis == "mu") c.problem.mu = to_double(value);
    else if (axis == "gamma0") c.gamma0 = to_double(value);
    else if (axis == "alpha") c.alpha = to_double(value);
    else if (axis == "noise_std") c.noise_std = to_double(value);
    else if (axis == "s_i") c.proj_s = static_cast<int>(to_int(value));
    else if (axis == "N") {
      c.problem.n = static_cast<int>(to_int(value));
      c.problem.a.reset();
      c.problem.u.reset();
      c.problem.b.reset();
    } else if (axis == "seed") c.master_seed = to_uint(value);
    else throw ConfigError("invalid sweep axis '" + axis + "'");
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad sweep value '" + value + "' for axis '" + axis + "'");
  }
  auto v = config_violations(c);
  if (!v.empty()) throw ConfigParseError(std::move(v));
  return c;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::string& axis,
              const std::vector<std::string>& values, std::ostream& out) {
  return guarded(out, [&] {
    const auto& axes = sweep_axes();
    if (std::find(axes.begin(), axes.end(), axis) == axes.end())
      throw ConfigError("invalid sweep axis '" + axis + "'");
    if (values.empty()) throw ConfigError("sweep needs at least one value");

    std::string csv = axis + "," + csv_header() + "\n";
    for (const auto& value : values) {
      ExperimentConfig c = apply_axis(cfg, axis, value);
      ProblemInstance p = build_problem(c);
      RunConfig rc = build_run_config(c, build_schedule(c.schedule, p.num_agents()));
      RunResult res = run(p, rc);
      for (const auto& r : res.records) csv += value + "," + csv_row(r) + "\n";
      const auto& half = res.ergodic_half.back();
      out << axis << " = " << value << ": final phi(y) = " << format_double(res.records.back().phi_y)
          << ", global violation of y~ = " << format_double(half.global_viol_y_tilde)
          << ", a_T = " << format_double(res.records.back().a_t) << "\n";
    }
    write_file(cfg.output, csv);
    out << "sweep: " << values.size() << " runs -> " << cfg.output << "\n";
    return 0;
  });
}

}  // namespace distopt
