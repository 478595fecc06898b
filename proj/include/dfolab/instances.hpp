#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "dfolab/core.hpp"
#include "dfolab/noise.hpp"

namespace dfolab {

/// Anything with an exact value, gradient and known minimizer.
template <class F>
concept Objective = requires(const F& f, const Vector& w) {
  { f.dim() } -> std::convertible_to<Eigen::Index>;
  { f.value(w) } -> std::convertible_to<double>;
  { f.gradient(w) } -> std::convertible_to<Vector>;
  { f.minimizer() } -> std::convertible_to<Vector>;
  { f.min_value() } -> std::convertible_to<double>;
  { f.strong_convexity() } -> std::convertible_to<double>;
};

/// Golden-section search for the minimizer of a unimodal f on [lo, hi].
template <class Fn>
double golden_section_minimize(Fn&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

/// Scaled 1-D profile y^2 - y/(1+y^2) of the smooth hard family.
inline double smooth_profile(double y) { return y * y - y / (1.0 + y * y); }

/// Minimizer of smooth_profile on [0, 1] (approx. 0.34896). The smooth hard
/// instance with sign vector e is minimized at this constant times e.
inline double smooth_minimizer_constant() {
  static const double c = golden_section_minimize(smooth_profile, 0.0, 1.0, 1e-10);
  return c;
}

/// g_a(x) = x^2 - a x / (1 + (x/a)^2), one coordinate of the smooth family. a != 0.
inline double smooth_component(double a, double x) {
  const double y = x / a;
  return x * x - a * x / (1.0 + y * y);
}

/// g'_a(x) = 2x - a (1 - (x/a)^2) / (1 + (x/a)^2)^2.
inline double smooth_component_derivative(double a, double x) {
  const double y = x / a;
  const double q = 1.0 + y * y;
  return 2.0 * x - a * (1.0 - y * y) / (q * q);
}

// ---------------------------------------------------------------------------

/// F(w) = w^T A w + b^T w + c with A symmetric positive definite.
///
/// On construction the function is rescaled so that |A|_2, |b| and |c| are all
/// at most 1, and the exact minimizer -A^{-1} b / 2 is computed and cached.
class QuadraticInstance {
 public:
  QuadraticInstance(Matrix A, Vector b, double c) : A_(std::move(A)), b_(std::move(b)), c_(c) {
    require(A_.rows() == A_.cols(), "QuadraticInstance: A must be square");
    require_dim(b_, A_.rows(), "QuadraticInstance");
    require(A_.rows() > 0, "QuadraticInstance: empty dimension");
    require((A_ - A_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, A_.cwiseAbs().maxCoeff()),
            "QuadraticInstance: A must be symmetric");
    A_ = 0.5 * (A_ + A_.transpose());

    Eigen::SelfAdjointEigenSolver<Matrix> eig(A_, Eigen::EigenvaluesOnly);
    double lo = eig.eigenvalues().minCoeff();
    double hi = eig.eigenvalues().maxCoeff();
    require(lo > 0.0, "QuadraticInstance: A must be positive definite");

    const double scale = std::max({1.0, hi, b_.norm(), std::abs(c_)});
    if (scale > 1.0) {
      A_ /= scale;
      b_ /= scale;
      c_ /= scale;
      lo /= scale;
      hi /= scale;
    }
    lambda_ = 2.0 * lo;
    smoothness_ = 2.0 * hi;
    minimizer_ = -0.5 * A_.ldlt().solve(b_);
    require(minimizer_.allFinite(), "QuadraticInstance: minimizer is not finite");
    min_value_ = value(minimizer_);
  }

  /// (1/2)|w|^2 - <e, w>, minimized at e.
  static QuadraticInstance identity_scaled(const Vector& e) {
    const auto d = e.size();
    return QuadraticInstance(0.5 * Matrix::Identity(d, d), -e, 0.0);
  }

  Eigen::Index dim() const { return b_.size(); }
  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  double c() const { return c_; }
  /// Smallest eigenvalue of 2A.
  double lambda() const { return lambda_; }
  double strong_convexity() const { return lambda_; }
  double smoothness() const { return smoothness_; }
  const Vector& minimizer() const { return minimizer_; }
  /// The recorded bound B on |w*|.
  double minimizer_norm() const { return minimizer_.norm(); }
  double min_value() const { return min_value_; }

  double value(const Vector& w) const {
    require_dim(w, dim(), "QuadraticInstance::value");
    return w.dot(A_ * w) + b_.dot(w) + c_;
  }

  Vector gradient(const Vector& w) const {
    require_dim(w, dim(), "QuadraticInstance::gradient");
    return 2.0 * (A_ * w) + b_;
  }

 private:
  Matrix A_;
  Vector b_;
  double c_;
  double lambda_ = 0.0;
  double smoothness_ = 0.0;
  Vector minimizer_;
  double min_value_ = 0.0;
};

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
inline Matrix random_orthogonal(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix G(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) G(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ();
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  return Q;
}

/// Random quadratic with lambda-strong convexity: spectrum of A is lambda/2 on
/// one axis and log-uniform in [lambda/2, 1/2] elsewhere, rotated by a random
/// orthogonal matrix; b uniform on the sphere of radius b_norm; c = 0.
inline QuadraticInstance random_quadratic(Eigen::Index d, double lambda, double b_norm, Rng& rng) {
  require(d >= 1, "random_quadratic: d must be positive");
  require(lambda > 0.0 && lambda <= 1.0, "random_quadratic: lambda must lie in (0, 1]");
  require(b_norm >= 0.0 && b_norm <= 1.0, "random_quadratic: b_norm must lie in [0, 1]");
  const double lo = std::log(lambda / 2.0), hi = std::log(0.5);
  Vector spectrum(d);
  spectrum[0] = lambda / 2.0;
  for (Eigen::Index i = 1; i < d; ++i) spectrum[i] = std::exp(lo + (hi - lo) * uniform01(rng));
  const Matrix Q = random_orthogonal(d, rng);
  Matrix A = Q * spectrum.asDiagonal() * Q.transpose();
  A = 0.5 * (A + A.transpose());
  Vector b = b_norm * random_unit_vector(d, rng);
  return QuadraticInstance(std::move(A), std::move(b), 0.0);
}

// ---------------------------------------------------------------------------

enum class HardFamily { quadratic, smooth };

/// Member of a lower-bound family indexed by e in {-mu, +mu}^d.
///   quadratic: F_e(w) = (1/2)|w|^2 - <e, w>, minimizer e, 1-strongly convex
///   smooth:    F_e(w) = |w|^2 - sum_i e_i w_i / (1 + (w_i/e_i)^2),
///              minimizer c* e, 0.5-strongly convex and 3.5-smooth
class HardInstance {
 public:
  HardInstance(HardFamily family, Vector e, double mu) : family_(family), e_(std::move(e)), mu_(mu) {
    require(mu_ > 0.0, "HardInstance: mu must be positive");
    require(e_.size() > 0, "HardInstance: empty dimension");
    for (Eigen::Index i = 0; i < e_.size(); ++i)
      require(std::abs(e_[i]) == mu_, "HardInstance: every coordinate of e must be +mu or -mu");
    if (family_ == HardFamily::quadratic)
      require(e_.norm() <= 1.0 + 1e-12, "HardInstance: quadratic family needs |e| <= 1");
    minimizer_ = family_ == HardFamily::quadratic ? e_ : Vector(smooth_minimizer_constant() * e_);
    min_value_ = value(minimizer_);
  }

  HardFamily family() const { return family_; }
  const Vector& e() const { return e_; }
  double mu() const { return mu_; }
  Eigen::Index dim() const { return e_.size(); }
  const Vector& minimizer() const { return minimizer_; }
  double min_value() const { return min_value_; }
  double strong_convexity() const { return family_ == HardFamily::quadratic ? 1.0 : 0.5; }
  double smoothness() const { return family_ == HardFamily::quadratic ? 1.0 : 3.5; }

  double value(const Vector& w) const {
    require_dim(w, dim(), "HardInstance::value");
    if (family_ == HardFamily::quadratic) return 0.5 * w.squaredNorm() - e_.dot(w);
    double s = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) s += smooth_component(e_[i], w[i]);
    return s;
  }

  Vector gradient(const Vector& w) const {
    require_dim(w, dim(), "HardInstance::gradient");
    if (family_ == HardFamily::quadratic) return w - e_;
    Vector g(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) g[i] = smooth_component_derivative(e_[i], w[i]);
    return g;
  }

  /// The same function as a QuadraticInstance (quadratic family only).
  QuadraticInstance as_quadratic() const {
    require(family_ == HardFamily::quadratic, "HardInstance::as_quadratic: smooth family");
    return QuadraticInstance::identity_scaled(e_);
  }

 private:
  HardFamily family_;
  Vector e_;
  double mu_;
  Vector minimizer_;
  double min_value_ = 0.0;
};

/// mu = min{1/sqrt(d), sqrt(d/(4T))} for the hard quadratic family.
inline double hard_quadratic_mu(long d, long T) {
  require(d >= 1 && T >= 1, "hard_quadratic_mu: d and T must be positive");
  return std::min(1.0 / std::sqrt(double(d)), std::sqrt(double(d) / (4.0 * double(T))));
}

/// mu = T^{-1/4} for the smooth hard family.
inline double hard_smooth_mu(long T) {
  require(T >= 1, "hard_smooth_mu: T must be positive");
  return std::pow(double(T), -0.25);
}

inline HardInstance sample_hard_instance(HardFamily family, long d, double mu, Rng& rng) {
  require(d >= 1, "sample_hard_instance: d must be positive");
  Vector e = mu * random_signs(d, rng);
  return HardInstance(family, std::move(e), mu);
}

inline HardInstance sample_hard_quadratic(long d, long T, Rng& rng,
                                          std::optional<double> mu_override = std::nullopt) {
  return sample_hard_instance(HardFamily::quadratic, d, mu_override.value_or(hard_quadratic_mu(d, T)), rng);
}

inline HardInstance sample_hard_smooth(long d, long T, Rng& rng,
                                       std::optional<double> mu_override = std::nullopt) {
  return sample_hard_instance(HardFamily::smooth, d, mu_override.value_or(hard_smooth_mu(T)), rng);
}

/// eval(instance, w) + xi_w with xi_w drawn fresh.
template <Objective F>
double query(const F& f, const Vector& w, const NoiseModel& noise, Rng& rng) {
  const double v = f.value(w);
  return v + noise.sample(w, rng);
}

// ---------------------------------------------------------------------------
// Decomposable oracles: F_hat(w) = R(w) + (w^T A_hat w + b_hat^T w + c_hat).

struct QuadraticTerm {
  Matrix A;
  Vector b;
  double c = 0.0;

  double value(const Vector& w) const { return w.dot(A * w) + b.dot(w) + c; }
};

/// Labeled example (x, y); as a quadratic term it is (x x^T, -2 y x, y^2).
struct LabeledExample {
  Vector x;
  double y = 0.0;
};

/// One draw of the stochastic quadratic term.
class StochasticTerm {
 public:
  StochasticTerm(QuadraticTerm t) : rep_(std::move(t)) {}
  StochasticTerm(LabeledExample ex) : rep_(std::move(ex)) {}

  double value(const Vector& w) const {
    if (const auto* ex = std::get_if<LabeledExample>(&rep_)) {
      const double r = w.dot(ex->x) - ex->y;
      return r * r;
    }
    return std::get<QuadraticTerm>(rep_).value(w);
  }

  QuadraticTerm triple() const {
    if (const auto* ex = std::get_if<LabeledExample>(&rep_))
      return {ex->x * ex->x.transpose(), -2.0 * ex->y * ex->x, ex->y * ex->y};
    return std::get<QuadraticTerm>(rep_);
  }

  const LabeledExample* example() const { return std::get_if<LabeledExample>(&rep_); }

 private:
  std::variant<QuadraticTerm, LabeledExample> rep_;
};

/// Deterministic part R of a decomposable oracle, with a subgradient accessor.
class Regularizer {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using SubgradientFn = std::function<Vector(const Vector&)>;

  Regularizer(ValueFn value, SubgradientFn subgradient)
      : value_(std::move(value)), subgradient_(std::move(subgradient)) {}

  /// R(w) = (lambda/2) |w|^2.
  static Regularizer squared_norm(double lambda) {
    require(lambda >= 0.0, "Regularizer::squared_norm: lambda must be non-negative");
    Regularizer r([lambda](const Vector& w) { return 0.5 * lambda * w.squaredNorm(); },
                  [lambda](const Vector& w) -> Vector { return lambda * w; });
    r.curvature_ = lambda;
    return r;
  }

  double value(const Vector& w) const { return value_(w); }
  Vector subgradient(const Vector& w) const { return subgradient_(w); }
  /// Set iff R(w) = (curvature/2)|w|^2, which makes the minimizer closed-form.
  std::optional<double> curvature() const { return curvature_; }

 private:
  ValueFn value_;
  SubgradientFn subgradient_;
  std::optional<double> curvature_;
};

/// Oracle answering F_hat(w) = R(w) + G_hat(w) with a fresh G_hat per query.
/// `mean_term` is E[(A_hat, b_hat, c_hat)] and defines the exact objective.
class DecomposableOracle {
 public:
  using Sampler = std::function<StochasticTerm(Rng&)>;

  DecomposableOracle(Regularizer regularizer, double subgradient_bound, Sampler sampler,
                     QuadraticTerm mean_term, double expected_frobenius_sq, double lambda)
      : regularizer_(std::move(regularizer)),
        subgradient_bound_(subgradient_bound),
        sampler_(std::move(sampler)),
        mean_(std::move(mean_term)),
        expected_frobenius_sq_(expected_frobenius_sq),
        lambda_(lambda) {
    require(mean_.A.rows() == mean_.A.cols() && mean_.A.rows() == mean_.b.size() && mean_.b.size() > 0,
            "DecomposableOracle: inconsistent mean term");
    require(subgradient_bound_ >= 0.0, "DecomposableOracle: N must be non-negative");
    require(lambda_ > 0.0, "DecomposableOracle: lambda must be positive");
  }

  /// Oracle that always returns the same triple.
  static DecomposableOracle frozen(Regularizer regularizer, double subgradient_bound, QuadraticTerm term,
                                   double lambda) {
    const double frob = term.A.squaredNorm();
    Sampler s = [term](Rng&) { return StochasticTerm(term); };
    return DecomposableOracle(std::move(regularizer), subgradient_bound, std::move(s), term, frob, lambda);
  }

  Eigen::Index dim() const { return mean_.b.size(); }
  const Regularizer& regularizer() const { return regularizer_; }
  double subgradient_bound() const { return subgradient_bound_; }
  const QuadraticTerm& mean_term() const { return mean_; }
  double expected_frobenius_sq() const { return expected_frobenius_sq_; }
  double strong_convexity() const { return lambda_; }

  StochasticTerm sample(Rng& rng) const { return sampler_(rng); }

  /// R(w) + G_hat(w) for a freshly drawn term; no additive xi.
  double query(const Vector& w, Rng& rng) const {
    require_dim(w, dim(), "DecomposableOracle::query");
    const StochasticTerm t = sampler_(rng);
    return regularizer_.value(w) + t.value(w);
  }

  double value(const Vector& w) const {
    require_dim(w, dim(), "DecomposableOracle::value");
    return regularizer_.value(w) + mean_.value(w);
  }

  Vector gradient(const Vector& w) const {
    require_dim(w, dim(), "DecomposableOracle::gradient");
    return regularizer_.subgradient(w) + (mean_.A + mean_.A.transpose()) * w + mean_.b;
  }

  /// Closed form when R is a squared norm; otherwise a contract violation.
  Vector minimizer() const {
    const auto k = regularizer_.curvature();
    require(k.has_value(), "DecomposableOracle::minimizer: regularizer is not a squared norm");
    const Matrix H = (mean_.A + mean_.A.transpose()) + *k * Matrix::Identity(dim(), dim());
    return H.ldlt().solve(-mean_.b);
  }

  double min_value() const { return value(minimizer()); }

 private:
  Regularizer regularizer_;
  double subgradient_bound_;
  Sampler sampler_;
  QuadraticTerm mean_;
  double expected_frobenius_sq_;
  double lambda_;
};

/// Ridge-regression stream: x uniform on the unit sphere, y = <theta, x> + eta
/// with |theta| <= 1/2 and eta uniform on {-1/2, +1/2}, so |x| = 1 and |y| <= 1.
/// Each query answers (lambda/2)|w|^2 + (w^T x - y)^2.
class RidgeSampler {
 public:
  static constexpr double kLabelNoise = 0.5;

  RidgeSampler(Vector theta, double lambda) : theta_(std::move(theta)), lambda_(lambda) {
    require(theta_.size() > 0, "RidgeSampler: empty dimension");
    require(theta_.norm() <= 0.5 + 1e-12, "RidgeSampler: |theta| must be at most 1/2");
    require(lambda_ > 0.0, "RidgeSampler: lambda must be positive");
  }

  Eigen::Index dim() const { return theta_.size(); }
  double lambda() const { return lambda_; }
  const Vector& theta() const { return theta_; }

  LabeledExample draw(Rng& rng) const {
    LabeledExample ex;
    ex.x = random_unit_vector(dim(), rng);
    const double eta = (rng() & 1U) ? kLabelNoise : -kLabelNoise;
    ex.y = theta_.dot(ex.x) + eta;
    return ex;
  }

  double query(const Vector& w, const LabeledExample& ex) const {
    const double r = w.dot(ex.x) - ex.y;
    return 0.5 * lambda_ * w.squaredNorm() + r * r;
  }

  /// E[x x^T] = I/d, E[-2 y x] = -2 theta/d, E[y^2] = |theta|^2/d + 1/4.
  QuadraticTerm mean_term() const {
    const auto d = dim();
    const double dd = double(d);
    return {Matrix::Identity(d, d) / dd, -2.0 * theta_ / dd,
            theta_.squaredNorm() / dd + kLabelNoise * kLabelNoise};
  }

  /// The stream as a decomposable oracle on a working domain of radius B
  /// (N = lambda B, E|x x^T|_F^2 = |x|^4 = 1).
  DecomposableOracle to_oracle(double B) const {
    RidgeSampler self = *this;
    DecomposableOracle::Sampler s = [self](Rng& rng) { return StochasticTerm(self.draw(rng)); };
    return DecomposableOracle(Regularizer::squared_norm(lambda_), lambda_ * B, std::move(s), mean_term(), 1.0,
                              lambda_);
  }

 private:
  Vector theta_;
  double lambda_;
};

inline RidgeSampler random_ridge_sampler(Eigen::Index d, double lambda, Rng& rng) {
  return RidgeSampler(0.5 * random_unit_vector(d, rng), lambda);
}

}  // namespace dfolab
