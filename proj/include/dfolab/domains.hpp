#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "dfolab/core.hpp"

namespace dfolab {

struct Ball {
  Vector center;
  double radius = 1.0;
};

struct Box {
  Vector lower;
  Vector upper;
};

struct WholeSpace {};

/// Closed convex feasible set: a Euclidean ball, an axis-aligned box, or R^d.
class Domain {
 public:
  using Shape = std::variant<Ball, Box, WholeSpace>;

  static Domain ball(Vector center, double radius) {
    require(radius > 0.0, "Domain::ball: radius must be positive");
    return Domain(Ball{std::move(center), radius});
  }
  static Domain ball(Eigen::Index d, double radius) { return ball(Vector::Zero(d), radius); }
  static Domain box(Vector lower, Vector upper) {
    require(lower.size() == upper.size() && lower.size() > 0, "Domain::box: bound dimensions differ");
    require((lower.array() < upper.array()).all(), "Domain::box: need lower < upper coordinatewise");
    return Domain(Box{std::move(lower), std::move(upper)});
  }
  static Domain box(Eigen::Index d, double lower, double upper) {
    return box(Vector::Constant(d, lower), Vector::Constant(d, upper));
  }
  static Domain whole() { return Domain(WholeSpace{}); }

  const Shape& shape() const { return shape_; }
  bool is_ball() const { return std::holds_alternative<Ball>(shape_); }
  bool is_box() const { return std::holds_alternative<Box>(shape_); }
  bool is_whole() const { return std::holds_alternative<WholeSpace>(shape_); }

  bool contains(const Vector& w, double tol = 1e-12) const {
    if (const auto* b = std::get_if<Ball>(&shape_)) return (w - b->center).norm() <= b->radius + tol;
    if (const auto* x = std::get_if<Box>(&shape_))
      return ((w - x->lower).array() >= -tol).all() && ((x->upper - w).array() >= -tol).all();
    return true;
  }

  /// Euclidean projection. Points already inside are returned unchanged.
  Vector project(const Vector& w) const {
    if (const auto* b = std::get_if<Ball>(&shape_)) {
      require_dim(w, b->center.size(), "Domain::project");
      const Vector diff = w - b->center;
      const double n = diff.norm();
      if (n <= b->radius) return w;
      return b->center + (b->radius / n) * diff;
    }
    if (const auto* x = std::get_if<Box>(&shape_)) {
      require_dim(w, x->lower.size(), "Domain::project");
      return w.cwiseMax(x->lower).cwiseMin(x->upper);
    }
    return w;
  }

  double distance(const Vector& w) const { return (w - project(w)).norm(); }

  /// Points whose distance from the boundary is at least eps. Empty results
  /// are a configuration error.
  Domain shrink(double eps) const {
    if (const auto* b = std::get_if<Ball>(&shape_)) {
      if (!(b->radius - eps > 0.0)) throw ConfigError("shrinking ball by epsilon leaves an empty set");
      return ball(b->center, b->radius - eps);
    }
    if (const auto* x = std::get_if<Box>(&shape_)) {
      const Vector lo = x->lower.array() + eps, hi = x->upper.array() - eps;
      if (!(lo.array() < hi.array()).all()) throw ConfigError("shrinking box by epsilon leaves an empty set");
      return box(lo, hi);
    }
    return whole();
  }

 private:
  explicit Domain(Shape s) : shape_(std::move(s)) {}
  Shape shape_;
};

enum class DomainMode { interior_optimum, exterior_query };

inline std::string_view to_string(DomainMode m) {
  return m == DomainMode::interior_optimum ? "interior_optimum" : "exterior_query";
}

inline std::optional<DomainMode> parse_domain_mode(std::string_view s) {
  if (s == "interior_optimum") return DomainMode::interior_optimum;
  if (s == "exterior_query") return DomainMode::exterior_query;
  return std::nullopt;
}

/// The working domain W_bar = inner ∩ {w : |w| <= B}, where inner is the base
/// shrunk by epsilon (interior_optimum) or the base itself (exterior_query).
class WorkingDomain {
 public:
  const Domain& base() const { return base_; }
  const Domain& inner() const { return inner_; }
  double B() const { return B_; }
  double epsilon() const { return epsilon_; }
  DomainMode mode() const { return mode_; }

  /// W_bar as a single ball, when it is one.
  std::optional<Ball> as_ball(Eigen::Index d) const {
    if (inner_.is_whole()) return Ball{Vector::Zero(d), B_};
    if (const auto* b = std::get_if<Ball>(&inner_.shape())) {
      if (b->center.isZero(0.0)) return Ball{Vector::Zero(d), std::min(B_, b->radius)};
      if (b->center.norm() + b->radius <= B_) return *b;
    }
    return std::nullopt;
  }

  bool contains(const Vector& w, double tol = 1e-12) const {
    return w.norm() <= B_ + tol && inner_.contains(w, tol);
  }

  Vector project(const Vector& w) const {
    if (inner_.is_whole()) return project_norm_ball(w);
    if (const auto* b = std::get_if<Ball>(&inner_.shape())) return project_two_balls(*b, w);
    return project_box_ball(std::get<Box>(inner_.shape()), w);
  }

  double distance(const Vector& w) const { return (w - project(w)).norm(); }

  /// Whether a query at p is legitimate: within epsilon of W_bar in
  /// exterior_query mode, inside the original base in interior_optimum mode.
  bool query_point_feasible(const Vector& p, double tol = 1e-12) const {
    if (mode_ == DomainMode::exterior_query) return distance(p) <= epsilon_ * (1.0 + tol) + tol;
    return base_.contains(p, tol);
  }

  friend WorkingDomain build_working_domain(const Domain& base, double B, double epsilon, DomainMode mode);

 private:
  WorkingDomain(Domain base, Domain inner, double B, double eps, DomainMode mode)
      : base_(std::move(base)), inner_(std::move(inner)), B_(B), epsilon_(eps), mode_(mode) {}

  Vector project_norm_ball(const Vector& w) const {
    const double n = w.norm();
    return n <= B_ ? w : Vector((B_ / n) * w);
  }

  // Both constraints active means the answer lies on the intersection of the
  // two spheres, which is a (d-2)-sphere around the axis through c.
  Vector project_two_balls(const Ball& ball, const Vector& w) const {
    require_dim(w, ball.center.size(), "WorkingDomain::project");
    const double D = ball.center.norm();
    if (D <= 1e-15 * std::max(1.0, ball.radius)) {
      const double r = std::min(B_, ball.radius);
      const double n = w.norm();
      return n <= r ? w : Vector((r / n) * w);
    }
    const Vector p1 = inner_.project(w);
    if (p1.norm() <= B_ * (1.0 + 1e-14)) return p1;
    const Vector p2 = project_norm_ball(w);
    if ((p2 - ball.center).norm() <= ball.radius * (1.0 + 1e-14)) return p2;

    const Vector u = ball.center / D;
    const double a = (B_ * B_ - ball.radius * ball.radius + D * D) / (2.0 * D);
    const double rho = std::sqrt(std::max(0.0, B_ * B_ - a * a));
    Vector perp = w - w.dot(u) * u;
    const double pn = perp.norm();
    if (pn > 0.0) {
      perp /= pn;
    } else {
      // w on the axis: every point of the circle is equally close.
      perp = Vector::Zero(w.size());
      Eigen::Index k = 0;
      u.cwiseAbs().minCoeff(&k);
      perp[k] = 1.0;
      perp -= perp.dot(u) * u;
      perp.normalize();
    }
    return a * u + rho * perp;
  }

  // KKT: x(theta) = clamp(w / (1 + theta), lo, hi) with |x(theta)| = B.
  Vector project_box_ball(const Box& box, const Vector& w) const {
    require_dim(w, box.lower.size(), "WorkingDomain::project");
    auto x_of = [&](double theta) -> Vector { return (w / (1.0 + theta)).cwiseMax(box.lower).cwiseMin(box.upper); };
    Vector x = x_of(0.0);
    if (x.norm() <= B_) return x;
    double lo = 0.0, hi = 1.0;
    while (x_of(hi).norm() > B_) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (x_of(mid).norm() > B_) lo = mid;
      else hi = mid;
    }
    return x_of(hi);
  }

  Domain base_;
  Domain inner_;
  double B_;
  double epsilon_;
  DomainMode mode_;
};

/// Builds W_bar. Throws ConfigError if the result is empty or excludes the origin.
inline WorkingDomain build_working_domain(const Domain& base, double B, double epsilon, DomainMode mode) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("domain epsilon must lie in (0, 1]");
  if (!(B > 0.0)) throw ConfigError("domain B must be positive");
  Domain inner = mode == DomainMode::interior_optimum ? base.shrink(epsilon) : base;
  bool has_origin = true;
  if (const auto* b = std::get_if<Ball>(&inner.shape())) has_origin = b->center.norm() <= b->radius;
  if (const auto* x = std::get_if<Box>(&inner.shape()))
    has_origin = (x->lower.array() <= 0.0).all() && (x->upper.array() >= 0.0).all();
  if (!has_origin) throw ConfigError("working domain must contain the origin");
  return WorkingDomain(base, std::move(inner), B, epsilon, mode);
}

}  // namespace dfolab
