#pragma once

#include <cmath>
#include <cstdint>

#include "dfolab/core.hpp"
#include "dfolab/instances.hpp"
#include "dfolab/noise.hpp"

namespace dfolab {

/// One gradient estimate together with what it cost: the point actually
/// queried and the value observed there.
struct GradientSample {
  Vector g_tilde;
  Vector query_point;
  double observed_value = 0.0;
  Vector r;
};

/// Callable answering a noisy value query: double(const Vector&, Rng&).
template <class O>
concept ValueOracle = requires(const O& o, const Vector& w, Rng& rng) {
  { o(w, rng) } -> std::convertible_to<double>;
};

/// Wraps an exact objective and a noise model into a value oracle.
template <Objective F>
auto noisy_oracle(const F& f, NoiseModel noise) {
  return [&f, noise](const Vector& w, Rng& rng) { return query(f, w, noise, rng); };
}

inline auto decomposable_value_oracle(const DecomposableOracle& o) {
  return [&o](const Vector& w, Rng& rng) { return o.query(w, rng); };
}

/// One-point estimate: query v at w + (eps/sqrt(d)) r, return (sqrt(d) v / eps) r.
/// Unbiased for quadratic objectives at any fixed eps.
template <ValueOracle O>
GradientSample one_point_gradient(const O& oracle, const Vector& w, double epsilon, Rng& rng) {
  require(epsilon > 0.0 && epsilon <= 1.0, "one_point_gradient: epsilon must lie in (0, 1]");
  const double sd = std::sqrt(double(w.size()));
  GradientSample s;
  s.r = random_signs(w.size(), rng);
  s.query_point = w + (epsilon / sd) * s.r;
  s.observed_value = oracle(s.query_point, rng);
  s.g_tilde = (sd * s.observed_value / epsilon) * s.r;
  return s;
}

template <Objective F>
GradientSample one_point_gradient(const F& f, const Vector& w, double epsilon, const NoiseModel& noise, Rng& rng) {
  return one_point_gradient(noisy_oracle(f, noise), w, epsilon, rng);
}

/// Decomposed estimate: query v at w + r, return (v - R(w + r)) r + g_R(w).
inline GradientSample decomposed_gradient(const DecomposableOracle& oracle, const Vector& w, Rng& rng) {
  require_dim(w, oracle.dim(), "decomposed_gradient");
  GradientSample s;
  s.r = random_signs(w.size(), rng);
  s.query_point = w + s.r;
  s.observed_value = oracle.query(s.query_point, rng);
  s.g_tilde = (s.observed_value - oracle.regularizer().value(s.query_point)) * s.r +
              oracle.regularizer().subgradient(w);
  return s;
}

inline constexpr int kMaxEnumerationDim = 20;

namespace detail {

inline Vector signs_from_mask(Eigen::Index d, std::uint64_t mask) {
  Vector r(d);
  for (Eigen::Index i = 0; i < d; ++i) r[i] = ((mask >> i) & 1U) ? 1.0 : -1.0;
  return r;
}

inline void require_enumerable(Eigen::Index d) {
  require(d >= 1 && d <= kMaxEnumerationDim, "exact expectation over r: d must lie in [1, 20]");
}

}  // namespace detail

/// Exact average of the noiseless one-point estimate over all 2^d sign vectors.
template <Objective F>
Vector expected_one_point_gradient(const F& f, const Vector& w, double epsilon) {
  const auto d = w.size();
  detail::require_enumerable(d);
  require(epsilon > 0.0 && epsilon <= 1.0, "expected_one_point_gradient: epsilon must lie in (0, 1]");
  const double sd = std::sqrt(double(d));
  const std::uint64_t n = std::uint64_t{1} << d;
  Vector sum = Vector::Zero(d);
  for (std::uint64_t m = 0; m < n; ++m) {
    const Vector r = detail::signs_from_mask(d, m);
    const double v = f.value(w + (epsilon / sd) * r);
    sum += (sd * v / epsilon) * r;
  }
  return sum / double(n);
}

/// Exact average of the decomposed estimate over all 2^d sign vectors, with the
/// stochastic term replaced by its mean.
inline Vector expected_decomposed_gradient(const DecomposableOracle& oracle, const Vector& w) {
  const auto d = w.size();
  detail::require_enumerable(d);
  require_dim(w, oracle.dim(), "expected_decomposed_gradient");
  const std::uint64_t n = std::uint64_t{1} << d;
  const Vector gR = oracle.regularizer().subgradient(w);
  Vector sum = Vector::Zero(d);
  for (std::uint64_t m = 0; m < n; ++m) {
    const Vector r = detail::signs_from_mask(d, m);
    const Vector q = w + r;
    const double v = oracle.value(q);
    sum += (v - oracle.regularizer().value(q)) * r + gR;
  }
  return sum / double(n);
}

}  // namespace dfolab
