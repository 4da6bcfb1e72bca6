#include "distopt/network.hpp"

#include "distopt/errors.hpp"
#include "distopt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace distopt {

namespace {

double min_positive(const WeightMatrix& W) {
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < W.rows(); ++i)
    for (Eigen::Index j = 0; j < W.cols(); ++j)
      if (W(i, j) > 0.0) m = std::min(m, W(i, j));
  return m;
}

void check_edges(int n, const std::vector<Edge>& edges) {
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
      std::ostringstream os;
      os << "invalid edge (" << i << "," << j << ") for " << n << " agents";
      throw ConfigError(os.str());
    }
  }
}

}  // namespace

std::vector<Edge> graph_ring(int n) {
  std::vector<Edge> e;
  if (n == 2) return {{0, 1}};
  for (int i = 0; n > 2 && i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return e;
}

std::vector<Edge> graph_complete(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return e;
}

std::vector<Edge> graph_star(int n) {
  std::vector<Edge> e;
  for (int i = 1; i < n; ++i) e.emplace_back(0, i);
  return e;
}

std::vector<Edge> graph_path(int n) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return e;
}

WeightMatrix metropolis_weights(int n, const std::vector<Edge>& edges) {
  if (n < 1) throw ConfigError("metropolis: need at least one agent");
  check_edges(n, edges);
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (auto [i, j] : edges) adj[i][j] = adj[j][i] = 1;
  std::vector<int> deg(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) deg[i] += adj[i][j];

  WeightMatrix W = WeightMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!adj[i][j]) continue;
      W(i, j) = 1.0 / (1.0 + std::max(deg[i], deg[j]));
      off += W(i, j);
    }
    W(i, i) = 1.0 - off;
  }
  return W;
}

StaticSchedule::StaticSchedule(WeightMatrix W, int q_period, std::string name)
    : W_(std::move(W)), w_min_(min_positive(W_)), q_(q_period), name_(std::move(name)) {
  if (W_.rows() != W_.cols() || W_.rows() == 0) throw ConfigError("weight matrix must be square");
  if (q_ < 1) throw ConfigError("connectivity window Q must be >= 1");
}

SchedulePtr make_metropolis_schedule(int n, const std::vector<Edge>& edges) {
  return std::make_shared<StaticSchedule>(metropolis_weights(n, edges), 1, "metropolis");
}

SchedulePtr make_identity_schedule(int n) {
  return std::make_shared<StaticSchedule>(WeightMatrix::Identity(n, n), 1, "identity");
}

RingCycleSchedule::RingCycleSchedule(int n) : n_(n) {
  if (n < 1) throw ConfigError("ring schedule: need at least one agent");
}

WeightMatrix RingCycleSchedule::weights_at(std::int64_t t) const {
  WeightMatrix W = WeightMatrix::Identity(n_, n_);
  if (n_ < 2) return W;
  int i = static_cast<int>(t % n_);
  int j = (i + 1) % n_;
  W(i, i) = W(j, j) = W(i, j) = W(j, i) = 0.5;
  return W;
}

PairwiseGossipSchedule::PairwiseGossipSchedule(int n, std::uint64_t seed, int q_period)
    : n_(n), seed_(seed), q_(q_period) {
  if (n < 1) throw ConfigError("gossip schedule: need at least one agent");
  if (q_ < 1) throw ConfigError("connectivity window Q must be >= 1");
}

Edge PairwiseGossipSchedule::pair_at(std::int64_t t) const {
  Rng rng = make_stream(seed_, static_cast<std::uint64_t>(t), 0x60551Full);
  std::uniform_int_distribution<int> first(0, n_ - 1);
  std::uniform_int_distribution<int> second(0, n_ - 2);
  int i = first(rng);
  int j = second(rng);
  if (j >= i) ++j;
  return {i, j};
}

WeightMatrix PairwiseGossipSchedule::weights_at(std::int64_t t) const {
  WeightMatrix W = WeightMatrix::Identity(n_, n_);
  if (n_ < 2) return W;
  auto [i, j] = pair_at(t);
  W(i, i) = W(j, j) = W(i, j) = W(j, i) = 0.5;
  return W;
}

FunctionSchedule::FunctionSchedule(int n, std::function<WeightMatrix(std::int64_t)> fn,
                                   double w_min, int q, std::string name)
    : n_(n), fn_(std::move(fn)), w_min_(w_min), q_(q), name_(std::move(name)) {}

StochasticityReport check_doubly_stochastic(const WeightMatrix& W, double tol) {
  StochasticityReport r;
  if (W.rows() != W.cols()) return r;
  r.row_sums = W.rowwise().sum();
  r.col_sums = W.colwise().sum().transpose();
  r.max_row_dev = (r.row_sums.array() - 1.0).abs().maxCoeff();
  r.max_col_dev = (r.col_sums.array() - 1.0).abs().maxCoeff();
  r.min_nonzero = min_positive(W);
  r.has_negative = (W.array() < 0.0).any();
  r.pass = !r.has_negative && r.max_row_dev <= tol && r.max_col_dev <= tol;
  return r;
}

bool strongly_connected(int n, const std::vector<std::vector<char>>& adj) {
  if (n <= 1) return true;
  auto reach_all = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        bool edge = transpose ? adj[v][u] : adj[u][v];
        if (edge && !seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  return reach_all(false) && reach_all(true);
}

ConnectivityReport check_q_connectivity(const WeightSchedule& s, int Q, std::int64_t horizon) {
  if (Q < 1) throw ConfigError("connectivity window Q must be >= 1");
  if (horizon < Q) throw ConfigError("connectivity horizon must be >= Q");
  const int n = s.n_agents();
  ConnectivityReport r;

  // Sliding window of edge multiplicities; steps enter at the right and
  // leave at the left so each W(t) is generated once.
  std::vector<std::vector<int>> count(n, std::vector<int>(n, 0));
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  std::vector<WeightMatrix> window;
  auto apply = [&](const WeightMatrix& W, int delta) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && W(i, j) > 0.0) count[i][j] += delta;
  };
  for (int t = 0; t < Q; ++t) {
    window.push_back(s.weights_at(t));
    apply(window.back(), +1);
  }
  for (std::int64_t k = 0; k + Q <= horizon; ++k) {
    if (k > 0) {
      apply(window[(k - 1) % Q], -1);
      window[(k - 1) % Q] = s.weights_at(k + Q - 1);
      apply(window[(k - 1) % Q], +1);
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) adj[i][j] = count[i][j] > 0;
    ++r.windows_checked;
    if (!strongly_connected(n, adj)) {
      r.first_failing_window = k;
      return r;
    }
  }
  r.pass = true;
  return r;
}

double mixing_constant(int n, double w_min, int Q) {
  if (n < 1) throw ConfigError("mixing constant: N must be >= 1");
  if (!(w_min > 0.0) || w_min > 1.0)
    throw ConfigError("Assumption 3: w_min must lie in (0, 1]");
  if (Q < 1) throw ConfigError("mixing constant: Q must be >= 1");
  return std::pow(1.0 - w_min / (4.0 * n * n), 1.0 / Q);
}

std::vector<Vec> consensus_mix(const WeightMatrix& W, const std::vector<Vec>& states) {
  const auto n = static_cast<Eigen::Index>(states.size());
  if (W.rows() != n || W.cols() != n) throw ConfigError("consensus_mix: W does not match state count");
  std::vector<Vec> out;
  out.reserve(states.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec acc = Vec::Zero(states[i].size());
    for (Eigen::Index j = 0; j < n; ++j) {
      if (states[j].size() != acc.size()) throw ConfigError("consensus_mix: state size mismatch");
      if (W(i, j) != 0.0) acc += W(i, j) * states[j];
    }
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace distopt
