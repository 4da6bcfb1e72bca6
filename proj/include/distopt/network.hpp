#pragma once

#include "distopt/functions.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace distopt {

using WeightMatrix = Mat;
using Edge = std::pair<int, int>;

/// Time-varying mixing matrices W(t). Implementations are pure functions of
/// (construction parameters, t), so a schedule can be queried at any t in any
/// order and from several threads.
class WeightSchedule {
 public:
  virtual ~WeightSchedule() = default;
  virtual WeightMatrix weights_at(std::int64_t t) const = 0;
  virtual int n_agents() const = 0;
  /// Smallest nonzero weight the schedule ever produces.
  virtual double w_min() const = 0;
  /// Declared connectivity window Q.
  virtual int q_period() const = 0;
  virtual std::string name() const = 0;
};

using SchedulePtr = std::shared_ptr<const WeightSchedule>;

/// Undirected topologies for the static Metropolis family.
std::vector<Edge> graph_ring(int n);
std::vector<Edge> graph_complete(int n);
std::vector<Edge> graph_star(int n);
std::vector<Edge> graph_path(int n);

/// w_ij = 1/(1 + max(deg_i, deg_j)) on edges, remainder on the diagonal.
WeightMatrix metropolis_weights(int n, const std::vector<Edge>& edges);

/// Same W at every t.
class StaticSchedule final : public WeightSchedule {
 public:
  StaticSchedule(WeightMatrix W, int q_period = 1, std::string name = "static");
  WeightMatrix weights_at(std::int64_t) const override { return W_; }
  int n_agents() const override { return static_cast<int>(W_.rows()); }
  double w_min() const override { return w_min_; }
  int q_period() const override { return q_; }
  std::string name() const override { return name_; }

 private:
  WeightMatrix W_;
  double w_min_;
  int q_;
  std::string name_;
};

SchedulePtr make_metropolis_schedule(int n, const std::vector<Edge>& edges);
SchedulePtr make_identity_schedule(int n);

/// Step t averages the pair (k, k+1 mod N), k = t mod N, with weight ½; the
/// other agents keep their value. Declared window Q = N.
class RingCycleSchedule final : public WeightSchedule {
 public:
  explicit RingCycleSchedule(int n);
  WeightMatrix weights_at(std::int64_t t) const override;
  int n_agents() const override { return n_; }
  double w_min() const override { return n_ > 1 ? 0.5 : 1.0; }
  int q_period() const override { return std::max(1, n_); }
  std::string name() const override { return "ring"; }

 private:
  int n_;
};

/// Step t averages one uniformly random pair drawn from a stream keyed by
/// (seed, t). Connectivity holds only with high probability over a window,
/// so Q is declared by the caller.
class PairwiseGossipSchedule final : public WeightSchedule {
 public:
  PairwiseGossipSchedule(int n, std::uint64_t seed, int q_period);
  WeightMatrix weights_at(std::int64_t t) const override;
  int n_agents() const override { return n_; }
  double w_min() const override { return n_ > 1 ? 0.5 : 1.0; }
  int q_period() const override { return q_; }
  std::string name() const override { return "gossip"; }

  Edge pair_at(std::int64_t t) const;

 private:
  int n_;
  std::uint64_t seed_;
  int q_;
};

/// Arbitrary generator, used for fixtures and user-defined schedules.
class FunctionSchedule final : public WeightSchedule {
 public:
  FunctionSchedule(int n, std::function<WeightMatrix(std::int64_t)> fn, double w_min, int q,
                   std::string name = "custom");
  WeightMatrix weights_at(std::int64_t t) const override { return fn_(t); }
  int n_agents() const override { return n_; }
  double w_min() const override { return w_min_; }
  int q_period() const override { return q_; }
  std::string name() const override { return name_; }

 private:
  int n_;
  std::function<WeightMatrix(std::int64_t)> fn_;
  double w_min_;
  int q_;
  std::string name_;
};

struct StochasticityReport {
  bool pass = false;
  double max_row_dev = 0.0;
  double max_col_dev = 0.0;
  double min_nonzero = 0.0;
  bool has_negative = false;
  Vec row_sums;
  Vec col_sums;
};

StochasticityReport check_doubly_stochastic(const WeightMatrix& W, double tol = 1e-9);

struct ConnectivityReport {
  bool pass = false;
  std::optional<std::int64_t> first_failing_window;
  std::int64_t windows_checked = 0;
};

/// Every window [k, k+Q) with k ∈ [0, horizon − Q] must have a strongly
/// connected union graph {(i,j) : w_ij > 0, i ≠ j}.
ConnectivityReport check_q_connectivity(const WeightSchedule& s, int Q, std::int64_t horizon);

/// Reachability from node 0 forward and in the transpose.
bool strongly_connected(int n, const std::vector<std::vector<char>>& adj);

/// σ = (1 − w_min/(4N²))^{1/Q}.
double mixing_constant(int n, double w_min, int Q);

/// out_i = Σ_j W_ij · states_j.
std::vector<Vec> consensus_mix(const WeightMatrix& W, const std::vector<Vec>& states);

}  // namespace distopt
