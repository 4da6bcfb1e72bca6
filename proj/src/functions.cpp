#include "distopt/functions.hpp"

#include "distopt/errors.hpp"

#include <cmath>
#include <sstream>

namespace distopt {

void ConvexFunction::set_lipschitz_bound(double L) {
  if (!(L >= 0.0)) throw ConfigError("Lipschitz bound must be nonnegative");
  lipschitz_ = L;
}

void ConvexFunction::check_dim(const Vec& x) const {
  if (x.size() != dim()) {
    std::ostringstream os;
    os << describe() << ": expected dimension " << dim() << ", got " << x.size();
    throw ConfigError(os.str());
  }
}

AffineFunction::AffineFunction(Vec a, double b) : a_(std::move(a)), b_(b) {}

double AffineFunction::value(const Vec& x) const {
  check_dim(x);
  return a_.dot(x) + b_;
}

Vec AffineFunction::subgradient(const Vec& x) const {
  check_dim(x);
  return a_;
}

std::string AffineFunction::describe() const { return "affine"; }

QuadraticFunction::QuadraticFunction(Mat P, Vec q, double r)
    : P_(std::move(P)), q_(std::move(q)), r_(r) {
  if (P_.rows() != P_.cols() || P_.rows() != q_.size())
    throw ConfigError("quadratic: P must be square and match q");
  if ((P_ - P_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + P_.cwiseAbs().maxCoeff()))
    throw ConfigError("quadratic: P must be symmetric");
  if (P_.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(P_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12 * (1.0 + P_.cwiseAbs().maxCoeff()))
      throw ConfigError("quadratic: P must be positive semidefinite");
  }
}

double QuadraticFunction::value(const Vec& x) const {
  check_dim(x);
  return 0.5 * x.dot(P_ * x) + q_.dot(x) + r_;
}

Vec QuadraticFunction::subgradient(const Vec& x) const {
  check_dim(x);
  return P_ * x + q_;
}

std::string QuadraticFunction::describe() const { return "quadratic"; }

std::shared_ptr<QuadraticFunction> QuadraticFunction::weighted_distance(const Vec& w, const Vec& c) {
  // Σ w_j (x_j − c_j)² = ½ xᵀ(2W)x − (2Wc)ᵀx + cᵀWc
  Mat P = (2.0 * w).asDiagonal();
  Vec q = -2.0 * w.cwiseProduct(c);
  double r = c.dot(w.cwiseProduct(c));
  return std::make_shared<QuadraticFunction>(std::move(P), std::move(q), r);
}

WeightedL1Function::WeightedL1Function(Vec w, Vec c) : w_(std::move(w)), c_(std::move(c)) {
  if (w_.size() != c_.size()) throw ConfigError("weighted_l1: weight/center size mismatch");
  if ((w_.array() < 0.0).any()) throw ConfigError("weighted_l1: weights must be nonnegative");
}

double WeightedL1Function::value(const Vec& x) const {
  check_dim(x);
  return w_.dot((x - c_).cwiseAbs());
}

Vec WeightedL1Function::subgradient(const Vec& x) const {
  check_dim(x);
  Vec g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    double d = x[j] - c_[j];
    g[j] = d > 0.0 ? w_[j] : (d < 0.0 ? -w_[j] : 0.0);
  }
  return g;
}

std::string WeightedL1Function::describe() const { return "weighted_l1"; }

MaxAffineFunction::MaxAffineFunction(Mat slopes, Vec offsets)
    : slopes_(std::move(slopes)), offsets_(std::move(offsets)) {
  if (slopes_.rows() != offsets_.size() || slopes_.rows() == 0)
    throw ConfigError("max_affine: need at least one branch, one offset per branch");
}

int MaxAffineFunction::active_branch(const Vec& x) const {
  int best = 0;
  double best_val = slopes_.row(0).dot(x) + offsets_[0];
  for (int j = 1; j < slopes_.rows(); ++j) {
    double v = slopes_.row(j).dot(x) + offsets_[j];
    if (v > best_val) {
      best = j;
      best_val = v;
    }
  }
  return best;
}

double MaxAffineFunction::value(const Vec& x) const {
  check_dim(x);
  int j = active_branch(x);
  return slopes_.row(j).dot(x) + offsets_[j];
}

Vec MaxAffineFunction::subgradient(const Vec& x) const {
  check_dim(x);
  return slopes_.row(active_branch(x)).transpose();
}

std::string MaxAffineFunction::describe() const { return "max_affine"; }

CallableFunction::CallableFunction(int dim, ValueFn value, GradFn grad, std::string name)
    : dim_(dim), value_(std::move(value)), grad_(std::move(grad)), name_(std::move(name)) {
  if (dim_ <= 0) throw ConfigError("callable: dimension must be positive");
}

double CallableFunction::value(const Vec& x) const {
  check_dim(x);
  return value_(x);
}

Vec CallableFunction::subgradient(const Vec& x) const {
  check_dim(x);
  Vec g = grad_(x);
  if (g.size() != dim_) throw ConfigError(name_ + ": subgradient has wrong dimension");
  return g;
}

namespace {
template <class F>
FnPtr finish(std::shared_ptr<F> f, std::optional<double> L) {
  if (L) f->set_lipschitz_bound(*L);
  return f;
}
}  // namespace

FnPtr affine(Vec a, double b, std::optional<double> L) {
  return finish(std::make_shared<AffineFunction>(std::move(a), b), L);
}

FnPtr quadratic(Mat P, Vec q, double r, std::optional<double> L) {
  return finish(std::make_shared<QuadraticFunction>(std::move(P), std::move(q), r), L);
}

FnPtr weighted_l1(Vec w, Vec c, std::optional<double> L) {
  return finish(std::make_shared<WeightedL1Function>(std::move(w), std::move(c)), L);
}

FnPtr max_affine(Mat slopes, Vec offsets, std::optional<double> L) {
  return finish(std::make_shared<MaxAffineFunction>(std::move(slopes), std::move(offsets)), L);
}

FnPtr callable(int dim, CallableFunction::ValueFn value, CallableFunction::GradFn grad,
               std::string name, std::optional<double> L) {
  return finish(std::make_shared<CallableFunction>(dim, std::move(value), std::move(grad),
                                                   std::move(name)),
                L);
}

FnPtr affine1(double a, double b, std::optional<double> L) {
  return affine(Vec::Constant(1, a), b, L);
}

FnPtr square1(double c, double w, std::optional<double> L) {
  return finish(QuadraticFunction::weighted_distance(Vec::Constant(1, w), Vec::Constant(1, c)), L);
}

}  // namespace distopt
