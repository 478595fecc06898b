#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "dfolab/core.hpp"
#include "dfolab/domains.hpp"
#include "dfolab/estimators.hpp"
#include "dfolab/instances.hpp"
#include "dfolab/noise.hpp"

namespace dfolab {

/// A run hit a non-finite iterate.
class RunAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  long T = 1000;           // query budget, positive and even
  double lambda = 1.0;     // step size at round t is 1/(lambda t)
  double epsilon = 1.0;    // query radius (one-point estimator only)
  NoiseModel noise{};
  std::uint64_t seed = 0;
  long trajectory_limit = 1'000'000;  // longer runs keep only running sums
  bool check_queries = true;          // assert query feasibility on every round
};

struct RunRecord {
  Vector returned_point;            // suffix average over t = T/2 .. T
  std::vector<Vector> iterates;     // w_1 .. w_T
  std::vector<Vector> query_points; // one per round, T - 1 total
  std::vector<double> observed_values;
  std::uint64_t seed = 0;
  bool trajectory_elided = false;
  bool within_guarantee = true;     // false when the objective is not quadratic
  Vector played_sum;                // sum of all query points
  long played_count = 0;

  Vector mean_played_point() const { return played_sum / double(played_count); }
};

inline void validate(const SolverConfig& c) {
  require(c.T >= 2 && c.T % 2 == 0, "SolverConfig: T must be a positive even integer");
  require(c.lambda > 0.0, "SolverConfig: lambda must be positive");
  require(c.epsilon > 0.0 && c.epsilon <= 1.0, "SolverConfig: epsilon must lie in (0, 1]");
}

struct NoObserver {
  void operator()(long, const GradientSample&) const {}
};

/// Projected SGD from w_1 = 0 with step 1/(lambda t) for t = 1 .. T-1.
///
/// `grad_source(w, rng)` returns a GradientSample at w. The returned point is
/// the exact mean of w_{T/2} .. w_T (T/2 + 1 iterates); every iterate,
/// including w_T, is projected onto the working domain.
template <class GradSource, class Observer = NoObserver>
RunRecord run_sgd(GradSource&& grad_source, const WorkingDomain& domain, const SolverConfig& config,
                  Eigen::Index d, Observer&& observe = {}) {
  validate(config);
  require(domain.contains(Vector::Zero(d)), "run_sgd: working domain must contain the origin");

  RunRecord rec;
  rec.seed = config.seed;
  rec.trajectory_elided = config.T > config.trajectory_limit;
  if (!rec.trajectory_elided) {
    rec.iterates.reserve(std::size_t(config.T));
    rec.query_points.reserve(std::size_t(config.T - 1));
    rec.observed_values.reserve(std::size_t(config.T - 1));
  }

  Rng rng(config.seed);
  const long half = config.T / 2;
  Vector w = Vector::Zero(d);
  Vector suffix_sum = Vector::Zero(d);
  rec.played_sum = Vector::Zero(d);

  auto record_iterate = [&](long t, const Vector& wt) {
    if (t >= half) suffix_sum += wt;
    if (!rec.trajectory_elided) rec.iterates.push_back(wt);
  };

  record_iterate(1, w);
  for (long t = 1; t < config.T; ++t) {
    GradientSample s = grad_source(w, rng);
    observe(t, s);
    rec.played_sum += s.query_point;
    ++rec.played_count;
    const double step = 1.0 / (config.lambda * double(t));
    Vector next = domain.project(w - step * s.g_tilde);
    if (!next.allFinite() || !std::isfinite(s.observed_value))
      throw RunAborted("non-finite iterate at round " + std::to_string(t) + " (seed " +
                       std::to_string(config.seed) + ")");
    if (!rec.trajectory_elided) {
      rec.query_points.push_back(std::move(s.query_point));
      rec.observed_values.push_back(s.observed_value);
    }
    w = std::move(next);
    record_iterate(t + 1, w);
  }
  rec.returned_point = suffix_sum / double(half + 1);
  return rec;
}

/// Algorithm 1: one-point estimates at radius eps/sqrt(d) around each iterate.
/// Every query is checked against the working domain when check_queries is set.
template <ValueOracle O, class Observer = NoObserver>
RunRecord run_algorithm1_oracle(const O& oracle, Eigen::Index d, const WorkingDomain& domain,
                                const SolverConfig& config, Observer&& observe = {}) {
  auto grad = [&](const Vector& w, Rng& rng) {
    GradientSample s = one_point_gradient(oracle, w, config.epsilon, rng);
    if (config.check_queries && !domain.query_point_feasible(s.query_point))
      throw ContractViolation("algorithm 1 queried outside the legitimate region");
    return s;
  };
  return run_sgd(grad, domain, config, d, std::forward<Observer>(observe));
}

template <Objective F, class Observer = NoObserver>
RunRecord run_algorithm1(const F& f, const WorkingDomain& domain, const SolverConfig& config,
                         Observer&& observe = {}) {
  RunRecord rec =
      run_algorithm1_oracle(noisy_oracle(f, config.noise), f.dim(), domain, config, std::forward<Observer>(observe));
  if constexpr (std::is_same_v<std::remove_cvref_t<F>, HardInstance>)
    rec.within_guarantee = f.family() == HardFamily::quadratic;
  return rec;
}

/// Algorithm 2: decomposed estimates from queries at w + r (distance sqrt(d)).
template <class Observer = NoObserver>
RunRecord run_algorithm2(const DecomposableOracle& oracle, const WorkingDomain& domain, const SolverConfig& config,
                         Observer&& observe = {}) {
  auto grad = [&](const Vector& w, Rng& rng) { return decomposed_gradient(oracle, w, rng); };
  return run_sgd(grad, domain, config, oracle.dim(), std::forward<Observer>(observe));
}

}  // namespace dfolab
