#pragma once

#include "distopt/functions.hpp"

#include <optional>
#include <random>
#include <utility>
#include <variant>
#include <vector>

namespace distopt {

/// Convex set with a closed-form Euclidean projection.
///
/// Kinds: whole space, box, Euclidean ball, scaled probability simplex
/// {x ≥ 0, Σx = scale}, halfspace {n·x ≤ offset}, and Cartesian products of
/// those. Instances are immutable values.
class SimpleSet {
 public:
  struct Whole { int dim; };
  struct Box { Vec lo, hi; };
  struct Ball { Vec center; double radius; };
  struct Simplex { int dim; double scale; };
  struct Halfspace { Vec normal; double offset; };
  struct Product { std::vector<SimpleSet> parts; };

  static SimpleSet whole(int dim);
  static SimpleSet box(Vec lo, Vec hi);
  static SimpleSet box(int dim, double lo, double hi);
  static SimpleSet ball(Vec center, double radius);
  static SimpleSet simplex(int dim, double scale = 1.0);
  static SimpleSet halfspace(Vec normal, double offset);
  static SimpleSet product(std::vector<SimpleSet> parts);

  int dim() const { return dim_; }

  /// argmin_{s ∈ set} ‖s − x‖. Points already in the set (to a few ulps) are
  /// returned unchanged so projection is exactly idempotent.
  Vec project(const Vec& x) const;
  double distance(const Vec& x) const;
  bool contains(const Vec& x, double tol) const { return distance(x) <= tol; }

  bool is_bounded() const;
  /// Box bounds when the set is a box or a product of boxes.
  std::optional<std::pair<Vec, Vec>> as_box() const;

  /// Random point in the set, used by the sampling validators.
  Vec sample(std::mt19937_64& rng, double spread = 10.0) const;

  std::string describe() const;

 private:
  using Kind = std::variant<Whole, Box, Ball, Simplex, Halfspace, Product>;
  SimpleSet(Kind kind, int dim) : kind_(std::move(kind)), dim_(dim) {}

  Kind kind_;
  int dim_;
};

}  // namespace distopt
