#include "distopt/sets.hpp"

#include "distopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace distopt {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Vec project_simplex(const Vec& x, double scale) {
  const Eigen::Index n = x.size();
  // Membership slack keeps projection idempotent under rounding.
  double sum = x.sum();
  if (x.minCoeff() >= 0.0 && std::abs(sum - scale) <= 8.0 * kEps * n * std::max(1.0, scale))
    return x;

  std::vector<double> u(x.data(), x.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumsum += u[j];
    double t = (cumsum - scale) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (x.array() - theta).cwiseMax(0.0).matrix();
}

}  // namespace

SimpleSet SimpleSet::whole(int dim) {
  if (dim <= 0) throw ConfigError("whole space: dimension must be positive");
  return SimpleSet(Whole{dim}, dim);
}

SimpleSet SimpleSet::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.size() == 0) throw ConfigError("box: lo/hi size mismatch");
  if ((lo.array() > hi.array()).any()) throw ConfigError("box: empty (lo > hi)");
  int d = static_cast<int>(lo.size());
  return SimpleSet(Box{std::move(lo), std::move(hi)}, d);
}

SimpleSet SimpleSet::box(int dim, double lo, double hi) {
  return box(Vec::Constant(dim, lo), Vec::Constant(dim, hi));
}

SimpleSet SimpleSet::ball(Vec center, double radius) {
  if (!(radius >= 0.0)) throw ConfigError("ball: radius must be nonnegative");
  if (center.size() == 0) throw ConfigError("ball: empty center");
  int d = static_cast<int>(center.size());
  return SimpleSet(Ball{std::move(center), radius}, d);
}

SimpleSet SimpleSet::simplex(int dim, double scale) {
  if (dim <= 0) throw ConfigError("simplex: dimension must be positive");
  if (!(scale > 0.0)) throw ConfigError("simplex: scale must be positive");
  return SimpleSet(Simplex{dim, scale}, dim);
}

SimpleSet SimpleSet::halfspace(Vec normal, double offset) {
  if (normal.size() == 0 || normal.squaredNorm() == 0.0)
    throw ConfigError("halfspace: normal must be nonzero");
  int d = static_cast<int>(normal.size());
  return SimpleSet(Halfspace{std::move(normal), offset}, d);
}

SimpleSet SimpleSet::product(std::vector<SimpleSet> parts) {
  if (parts.empty()) throw ConfigError("product: no factors");
  int d = 0;
  for (const auto& p : parts) d += p.dim();
  return SimpleSet(Product{std::move(parts)}, d);
}

Vec SimpleSet::project(const Vec& x) const {
  if (x.size() != dim_) {
    std::ostringstream os;
    os << "projection onto " << describe() << ": expected dimension " << dim_ << ", got "
       << x.size();
    throw ConfigError(os.str());
  }
  return std::visit(
      Overloaded{
          [&](const Whole&) -> Vec { return x; },
          [&](const Box& b) -> Vec { return x.cwiseMax(b.lo).cwiseMin(b.hi); },
          [&](const Ball& b) -> Vec {
            Vec d = x - b.center;
            double n = d.norm();
            if (n <= b.radius * (1.0 + 4.0 * kEps)) return x;
            return b.center + d * (b.radius / n);
          },
          [&](const Simplex& s) -> Vec { return project_simplex(x, s.scale); },
          [&](const Halfspace& h) -> Vec {
            double viol = h.normal.dot(x) - h.offset;
            double scale = h.normal.cwiseAbs().dot(x.cwiseAbs()) + std::abs(h.offset);
            if (viol <= 8.0 * kEps * scale) return x;
            return x - (viol / h.normal.squaredNorm()) * h.normal;
          },
          [&](const Product& p) -> Vec {
            Vec out(x.size());
            Eigen::Index off = 0;
            for (const auto& part : p.parts) {
              out.segment(off, part.dim()) = part.project(x.segment(off, part.dim()));
              off += part.dim();
            }
            return out;
          },
      },
      kind_);
}

double SimpleSet::distance(const Vec& x) const { return (x - project(x)).norm(); }

bool SimpleSet::is_bounded() const {
  return std::visit(Overloaded{
                        [](const Whole&) { return false; },
                        [](const Box&) { return true; },
                        [](const Ball&) { return true; },
                        [](const Simplex&) { return true; },
                        [](const Halfspace&) { return false; },
                        [](const Product& p) {
                          return std::all_of(p.parts.begin(), p.parts.end(),
                                             [](const SimpleSet& s) { return s.is_bounded(); });
                        },
                    },
                    kind_);
}

std::optional<std::pair<Vec, Vec>> SimpleSet::as_box() const {
  if (const auto* b = std::get_if<Box>(&kind_)) return std::make_pair(b->lo, b->hi);
  if (const auto* p = std::get_if<Product>(&kind_)) {
    Vec lo(dim_), hi(dim_);
    Eigen::Index off = 0;
    for (const auto& part : p->parts) {
      auto sub = part.as_box();
      if (!sub) return std::nullopt;
      lo.segment(off, part.dim()) = sub->first;
      hi.segment(off, part.dim()) = sub->second;
      off += part.dim();
    }
    return std::make_pair(lo, hi);
  }
  return std::nullopt;
}

Vec SimpleSet::sample(std::mt19937_64& rng, double spread) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto gaussian = [&](Eigen::Index n, double s) {
    Vec v(n);
    for (Eigen::Index j = 0; j < n; ++j) v[j] = s * normal(rng);
    return v;
  };
  return std::visit(
      Overloaded{
          [&](const Whole& w) -> Vec { return gaussian(w.dim, spread); },
          [&](const Box& b) -> Vec {
            Vec v(b.lo.size());
            for (Eigen::Index j = 0; j < v.size(); ++j) {
              double lo = std::isfinite(b.lo[j]) ? b.lo[j] : -spread;
              double hi = std::isfinite(b.hi[j]) ? b.hi[j] : spread;
              if (!std::isfinite(b.lo[j]) && std::isfinite(b.hi[j])) lo = b.hi[j] - 2 * spread;
              if (std::isfinite(b.lo[j]) && !std::isfinite(b.hi[j])) hi = b.lo[j] + 2 * spread;
              v[j] = lo + (hi - lo) * unif(rng);
            }
            return v;
          },
          [&](const Ball& b) -> Vec {
            Vec d = gaussian(b.center.size(), 1.0);
            double n = d.norm();
            if (n == 0.0) return b.center;
            double r = b.radius * std::pow(unif(rng), 1.0 / static_cast<double>(d.size()));
            return b.center + d * (r / n);
          },
          [&](const Simplex& s) -> Vec {
            // Normalized exponentials are uniform on the simplex.
            Vec v(s.dim);
            for (int j = 0; j < s.dim; ++j) v[j] = -std::log(1.0 - unif(rng));
            return v * (s.scale / v.sum());
          },
          [&](const Halfspace&) -> Vec { return project(gaussian(dim_, spread)); },
          [&](const Product& p) -> Vec {
            Vec out(dim_);
            Eigen::Index off = 0;
            for (const auto& part : p.parts) {
              out.segment(off, part.dim()) = part.sample(rng, spread);
              off += part.dim();
            }
            return out;
          },
      },
      kind_);
}

std::string SimpleSet::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const Whole& w) { os << "R^" << w.dim; },
                 [&](const Box& b) { os << "box(dim " << b.lo.size() << ")"; },
                 [&](const Ball& b) { os << "ball(r=" << b.radius << ")"; },
                 [&](const Simplex& s) { os << "simplex(scale=" << s.scale << ")"; },
                 [&](const Halfspace&) { os << "halfspace"; },
                 [&](const Product& p) { os << "product(" << p.parts.size() << ")"; },
             },
             kind_);
  return os.str();
}

}  // namespace distopt
