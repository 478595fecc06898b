#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dfolab/analysis.hpp"
#include "dfolab/core.hpp"
#include "dfolab/estimators.hpp"
#include "dfolab/instances.hpp"

namespace dfolab {

/// Random point with norm at most `radius`, uniform in direction and radius.
inline Vector random_point_in_ball(Eigen::Index d, double radius, Rng& rng) {
  return (radius * uniform01(rng)) * random_unit_vector(d, rng);
}

/// Random quadratic with random lambda, |b| and c, all within the unit bounds.
inline QuadraticInstance random_test_quadratic(Eigen::Index d, Rng& rng) {
  const double lambda = 0.1 + 0.9 * uniform01(rng);
  const QuadraticInstance q = random_quadratic(d, lambda, uniform01(rng), rng);
  return QuadraticInstance(q.A(), q.b(), 2.0 * uniform01(rng) - 1.0);
}

/// Decomposable oracle with a single fixed triple and R = (lambda/2)|w|^2.
inline DecomposableOracle random_frozen_oracle(Eigen::Index d, Rng& rng) {
  const QuadraticInstance q = random_test_quadratic(d, rng);
  const double lambda = 0.1 + 0.9 * uniform01(rng);
  return DecomposableOracle::frozen(Regularizer::squared_norm(lambda), lambda, {q.A(), q.b(), q.c()}, lambda);
}

/// Exact enumeration over r against the exact gradient, for both estimators:
/// d = 1..8, 20 instances x 20 points with |w| <= 1, eps in {0.25, 1}.
inline CheckResult check_unbiasedness(std::uint64_t seed, double tol = 1e-9) {
  Rng rng(seed);
  double worst = 0.0;
  std::string witness;
  long cases = 0;
  auto track = [&](const Vector& est, const Vector& exact, const std::string& where) {
    const double rel = (est - exact).norm() / exact.norm();
    ++cases;
    if (!(rel <= worst)) {
      worst = rel;
      witness = where;
    }
  };
  for (int d = 1; d <= 8; ++d) {
    for (int inst = 0; inst < 20; ++inst) {
      const QuadraticInstance q = random_test_quadratic(d, rng);
      const DecomposableOracle o = random_frozen_oracle(d, rng);
      for (int p = 0; p < 20; ++p) {
        const Vector w = random_point_in_ball(d, 1.0, rng);
        for (double eps : {0.25, 1.0})
          track(expected_one_point_gradient(q, w, eps), q.gradient(w),
                "one-point d=" + std::to_string(d) + " eps=" + detail::fmt_num(eps));
        track(expected_decomposed_gradient(o, w), o.gradient(w), "decomposed d=" + std::to_string(d));
      }
    }
  }
  return {"estimators.unbiasedness", worst <= tol,
          std::to_string(cases) + " cases, max relative error " + detail::fmt_num(worst) + " (" + witness +
              ", limit " + detail::fmt_num(tol) + ")"};
}

struct MomentCase {
  std::string estimator;
  long d = 0;
  double epsilon = 1.0;
  double empirical = 0.0;
  double bound = 0.0;
};

/// Empirical E|g_tilde|^2 over `draws` samples at a fixed point with |w| <= B = 1,
/// against the one-point bound (standard noise) and the decomposed bound
/// (ridge stream).
inline std::vector<MomentCase> moment_cases(std::uint64_t seed, long draws = 100000) {
  std::vector<MomentCase> out;
  Rng rng(seed);
  const double B = 1.0;
  const NoiseModel noise{NoiseKind::standard};
  for (long d : {2L, 5L, 10L}) {
    for (double eps : {1.0, 0.5}) {
      const QuadraticInstance q = random_test_quadratic(d, rng);
      const Vector w = random_point_in_ball(d, B, rng);
      double s = 0.0;
      for (long i = 0; i < draws; ++i) s += one_point_gradient(q, w, eps, noise, rng).g_tilde.squaredNorm();
      BoundParams p;
      p.d = double(d);
      p.B = B;
      p.epsilon = eps;
      out.push_back({"one_point", d, eps, s / double(draws), bounds::lemma1_moment(p)});
    }
    const RidgeSampler ridge = random_ridge_sampler(d, 1.0, rng);
    const DecomposableOracle o = ridge.to_oracle(B);
    const Vector w = random_point_in_ball(d, B, rng);
    double s = 0.0;
    for (long i = 0; i < draws; ++i) s += decomposed_gradient(o, w, rng).g_tilde.squaredNorm();
    BoundParams p;
    p.d = double(d);
    p.B = B;
    p.N = o.subgradient_bound();
    p.frobenius_sq = o.expected_frobenius_sq();
    out.push_back({"decomposed_ridge", d, 1.0, s / double(draws), bounds::lemma7_moment(p)});
  }
  return out;
}

inline CheckResult check_moment_bounds(std::uint64_t seed, long draws = 100000) {
  bool ok = true;
  std::string summary;
  for (const auto& c : moment_cases(seed, draws)) {
    const bool pass = c.empirical <= c.bound;
    ok = ok && pass;
    summary += (summary.empty() ? "" : "; ") + c.estimator + " d=" + std::to_string(c.d) +
              " eps=" + detail::fmt_num(c.epsilon) + ": " + detail::fmt_num(c.empirical) + " <= " +
              detail::fmt_num(c.bound) + (pass ? "" : " FAILED");
  }
  return {"estimators.moment_bounds", ok, summary};
}

/// kl(1, 0, 1) = 0.5 exactly; symmetry and c^2 scaling on random triples.
inline CheckResult check_kl(std::uint64_t seed, int triples = 1000, double tol = 1e-12) {
  Rng rng(seed);
  std::uniform_real_distribution<double> um(-1.0, 1.0), us(0.5, 2.0), uc(-2.0, 2.0);
  const bool exact = kl_gaussians(1.0, 0.0, 1.0) == 0.5;
  double sym = 0.0, scale = 0.0;
  for (int i = 0; i < triples; ++i) {
    const double a = um(rng), b = um(rng), s = us(rng), c = uc(rng);
    sym = std::max(sym, std::abs(kl_gaussians(a, b, s) - kl_gaussians(b, a, s)));
    scale = std::max(scale, std::abs(kl_gaussians(c * a, c * b, s) - c * c * kl_gaussians(a, b, s)));
  }
  return {"analysis.kl_gaussians", exact && sym <= tol && scale <= tol,
          std::string("kl(1,0,1) == 0.5: ") + (exact ? "yes" : "no") + ", max symmetry gap " +
              detail::fmt_num(sym) + ", max scaling gap " + detail::fmt_num(scale)};
}

/// Everything the `verify` subcommand runs.
inline std::vector<CheckResult> run_verification_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  out.push_back(check_unbiasedness(split_seed(seed, 1)));
  out.push_back(check_moment_bounds(split_seed(seed, 2)));
  for (auto& c : verify_lemma6(split_seed(seed, 3)).checks) out.push_back(std::move(c));
  out.push_back(check_kl(split_seed(seed, 4)));
  return out;
}

}  // namespace dfolab
