#pragma once

#include "distopt/problem.hpp"

#include <vector>

namespace testutil {

using namespace distopt;

inline Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

inline Vec s(double x) { return Vec::Constant(1, x); }

/// Scalar agent with objective w·(y − c)², couplings a_k·y + b_k, a hard set
/// and soft constraints.
inline AgentSpec scalar_agent(FnPtr objective, std::vector<FnPtr> coupling,
                              SimpleSet hard = SimpleSet::whole(1), std::vector<FnPtr> soft = {}) {
  AgentSpec a;
  a.dim = 1;
  a.objective = std::move(objective);
  a.coupling = std::move(coupling);
  a.hard_set = std::move(hard);
  a.soft = std::move(soft);
  return a;
}

}  // namespace testutil
