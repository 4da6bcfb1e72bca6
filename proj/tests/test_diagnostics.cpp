#include "distopt/diagnostics.hpp"
#include "distopt/errors.hpp"
#include "distopt/library.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace distopt;
using namespace testutil;

TEST_SUITE("diagnostics") {

TEST_CASE("disagreement") {
  CHECK(disagreement({s(1.0), s(1.0), s(1.0)}) == 0.0);
  CHECK(disagreement({s(1.0), s(3.0)}) == 2.0);
  CHECK(disagreement({v({1.0, 0.0}), v({3.0, 2.0})}) == 4.0);
}

TEST_CASE("tracking residual") {
  CHECK(tracking_residual({s(1.0), s(3.0)}, {s(0.0), s(4.0)}) == 0.0);
  CHECK(tracking_residual({s(1.0), s(3.0)}, {s(0.0), s(3.0)}) == 0.5);
}

TEST_CASE("ergodic points") {
  ErgodicAccumulator acc(1);
  for (double y : {0.0, 1.0, 2.0}) acc.add(0.5, s(y), s(y));
  CHECK(ergodic_points(acc).first[0] == doctest::Approx(1.0));

  ErgodicAccumulator w(1);
  w.add(1.0, s(0.0), s(0.0));
  w.add(3.0, s(4.0), s(2.0));
  auto [yt, xt] = ergodic_points(w);
  CHECK(yt[0] == 3.0);
  CHECK(xt[0] == 1.5);

  ErgodicAccumulator one(2);
  one.add(0.7, v({1.0, -2.0}), v({1.0, -2.0}));
  CHECK(ergodic_points(one).first == v({1.0, -2.0}));

  CHECK_THROWS_AS(ergodic_points(ErgodicAccumulator(1)), ConfigError);
}

TEST_CASE("ergodic windows from prefix snapshots") {
  ErgodicAccumulator run(1), prefix;
  for (int k = 0; k < 10; ++k) {
    if (k == 4) prefix = run;
    run.add(1.0 + k, s(k), s(k));
  }
  auto win = run.since(prefix);
  CHECK(win.start() == 4);
  CHECK(win.end() == 10);
  // Σ_{k=4}^{9} (1+k)k / Σ_{k=4}^{9} (1+k)
  double num = 0, den = 0;
  for (int k = 4; k < 10; ++k) num += (1.0 + k) * k, den += 1.0 + k;
  CHECK(ergodic_points(win).first[0] == doctest::Approx(num / den).epsilon(1e-14));
}

TEST_CASE("ergodic gap") {
  CoupledQuadraticParams prm;
  prm.a = {6, 7, 8};
  prm.u = {5, 5, 5};
  prm.b = 9;
  auto p = make_coupled_quadratic(prm);
  Vec ystar = v({8.0 / 3, 11.0 / 3, 14.0 / 3});
  ErgodicAccumulator at_opt(3);
  at_opt.add(1.0, ystar, ystar);
  CHECK(ergodic_gap(p, at_opt, 40.0, 0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  ErgodicAccumulator off(3);
  Vec y = v({1.0, 2.0, 3.0});
  off.add(1.0, y, y);
  double gap = ergodic_gap(p, off, 40.0, 0.5);
  CHECK(gap == doctest::Approx(penalty_objective(p, y) - 40.0));
  CHECK(gap >= 0.0);

  ErgodicAccumulator split(3);
  split.add(1.0, y, ystar);
  CHECK(ergodic_gap(p, split, 40.0, 0.5, 2.0) ==
        doctest::Approx(2.0 / 0.5 * (y - ystar).squaredNorm()).epsilon(1e-12));
}

TEST_CASE("power-law fits") {
  std::vector<std::pair<double, double>> half, flat, inv;
  for (double t : {10.0, 100.0, 1000.0, 1e4}) {
    half.emplace_back(t, std::pow(t, -0.5));
    flat.emplace_back(t, 3.0);
    inv.emplace_back(t, 1.0 / t);
  }
  CHECK(decay_fit(half).exponent == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(std::abs(decay_fit(flat).exponent) < 1e-12);
  CHECK(decay_fit(inv).exponent == doctest::Approx(-1.0).epsilon(1e-9));

  auto with_zero = half;
  with_zero.emplace_back(1e5, 0.0);
  auto f = decay_fit(with_zero);
  CHECK(f.used == 4);
  CHECK(f.excluded == 1);
  CHECK_THROWS_AS(decay_fit({{1.0, 1.0}, {2.0, 0.5}}), ConfigError);
}

TEST_CASE("geometric fit recovers the per-step log rate") {
  std::vector<std::pair<double, double>> g;
  for (int t = 0; t < 50; ++t) g.emplace_back(t, 7.0 * std::pow(0.9, t));
  CHECK(geometric_fit(g).exponent == doctest::Approx(std::log(0.9)).epsilon(1e-12));
}

TEST_CASE("csv formatting") {
  CHECK(csv_header() ==
        "t,gamma,phi_y,phi_proj,dist_G_sq,a_t,lemma1_resid,global_viol,local_viol_max");
  MetricsRecord r;
  r.t = 12;
  r.gamma = 0.1;
  r.phi_y = 1.0 / 3.0;
  std::string row = csv_row(r);
  CHECK(row.rfind("12,0.10000000000000001,0.33333333333333331,", 0) == 0);
  std::istringstream in(row);
  std::string cell;
  int cells = 0;
  while (std::getline(in, cell, ',')) ++cells;
  CHECK(cells == 9);
  CHECK(std::stod(format_double(1.0 / 7.0)) == 1.0 / 7.0);
}

}  // TEST_SUITE
