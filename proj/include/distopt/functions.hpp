#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace distopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A convex function oracle: value, one subgradient, and an optional declared
/// Lipschitz constant valid on the hard set of the agent that owns it.
class ConvexFunction {
 public:
  virtual ~ConvexFunction() = default;

  virtual int dim() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual Vec subgradient(const Vec& x) const = 0;
  virtual std::string describe() const = 0;

  std::optional<double> lipschitz_bound() const { return lipschitz_; }
  void set_lipschitz_bound(double L);

 protected:
  void check_dim(const Vec& x) const;

 private:
  std::optional<double> lipschitz_;
};

using FnPtr = std::shared_ptr<const ConvexFunction>;

/// a·x + b
class AffineFunction final : public ConvexFunction {
 public:
  AffineFunction(Vec a, double b);
  int dim() const override { return static_cast<int>(a_.size()); }
  double value(const Vec& x) const override;
  Vec subgradient(const Vec& x) const override;
  std::string describe() const override;

  const Vec& slope() const { return a_; }
  double offset() const { return b_; }

 private:
  Vec a_;
  double b_;
};

/// ½ xᵀPx + qᵀx + r with P symmetric positive semidefinite.
class QuadraticFunction final : public ConvexFunction {
 public:
  QuadraticFunction(Mat P, Vec q, double r);
  int dim() const override { return static_cast<int>(q_.size()); }
  double value(const Vec& x) const override;
  Vec subgradient(const Vec& x) const override;
  std::string describe() const override;

  /// Σ_j w_j (x_j − c_j)², w_j ≥ 0.
  static std::shared_ptr<QuadraticFunction> weighted_distance(const Vec& w, const Vec& c);

 private:
  Mat P_;
  Vec q_;
  double r_;
};

/// Σ_j w_j |x_j − c_j|, w_j ≥ 0. At a kink the subgradient component is 0.
class WeightedL1Function final : public ConvexFunction {
 public:
  WeightedL1Function(Vec w, Vec c);
  int dim() const override { return static_cast<int>(w_.size()); }
  double value(const Vec& x) const override;
  Vec subgradient(const Vec& x) const override;
  std::string describe() const override;

 private:
  Vec w_;
  Vec c_;
};

/// max_j (a_j·x + b_j); ties resolve to the lowest branch index.
class MaxAffineFunction final : public ConvexFunction {
 public:
  /// Row j of `slopes` is a_j.
  MaxAffineFunction(Mat slopes, Vec offsets);
  int dim() const override { return static_cast<int>(slopes_.cols()); }
  double value(const Vec& x) const override;
  Vec subgradient(const Vec& x) const override;
  std::string describe() const override;

  int active_branch(const Vec& x) const;

 private:
  Mat slopes_;
  Vec offsets_;
};

/// User-supplied oracle. Convexity is the caller's promise; validate_oracles
/// checks it by sampling.
class CallableFunction final : public ConvexFunction {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;

  CallableFunction(int dim, ValueFn value, GradFn grad, std::string name = "user");
  int dim() const override { return dim_; }
  double value(const Vec& x) const override;
  Vec subgradient(const Vec& x) const override;
  std::string describe() const override { return name_; }

 private:
  int dim_;
  ValueFn value_;
  GradFn grad_;
  std::string name_;
};

// Convenience constructors returning shared oracles.
FnPtr affine(Vec a, double b, std::optional<double> L = std::nullopt);
FnPtr quadratic(Mat P, Vec q, double r, std::optional<double> L = std::nullopt);
FnPtr weighted_l1(Vec w, Vec c, std::optional<double> L = std::nullopt);
FnPtr max_affine(Mat slopes, Vec offsets, std::optional<double> L = std::nullopt);
FnPtr callable(int dim, CallableFunction::ValueFn value, CallableFunction::GradFn grad,
               std::string name = "user", std::optional<double> L = std::nullopt);

/// Scalar shorthand: a·x + b on ℝ.
FnPtr affine1(double a, double b, std::optional<double> L = std::nullopt);
/// Scalar shorthand: w·(x − c)² on ℝ.
FnPtr square1(double c, double w = 1.0, std::optional<double> L = std::nullopt);

}  // namespace distopt
