#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dfolab/analysis.hpp"
#include "dfolab/config.hpp"
#include "dfolab/core.hpp"
#include "dfolab/domains.hpp"
#include "dfolab/instances.hpp"
#include "dfolab/solvers.hpp"

namespace dfolab {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct RunOptions {
  unsigned jobs = 1;
  bool record_timing = false;  // wall_time_ms stays 0 otherwise, keeping output byte-stable
  bool retain_reps = false;
};

/// DFOLAB_JOBS if set to a positive integer, else 1.
inline unsigned default_jobs() {
  if (const char* s = std::getenv("DFOLAB_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && *end == '\0' && v > 0) return unsigned(v);
  }
  return 1;
}

struct ReplicationOutcome {
  bool ok = false;
  double error = 0.0;
  double regret = 0.0;
  double mean_played_error = 0.0;  // F(mean played point) - F(w*)
  std::string failure;
};

struct CellResult {
  long d = 0;
  long T = 0;
  double lambda = 0.0;
  double epsilon = 0.0;
  NoiseKind noise = NoiseKind::none;
  long replications = 0;  // completed
  long failed = 0;
  MeanCI error;
  MeanCI regret;
  double wall_time_ms = 0.0;
  long jensen_violations = 0;  // regret < F(mean played) - F(w*) beyond 1e-9
  std::vector<double> rep_errors;
  std::vector<double> rep_regrets;
  std::vector<std::string> failures;
};

struct ExperimentResult {
  Algorithm algorithm = Algorithm::alg1;
  Family family = Family::quadratic_random;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string version = kArtifactVersion;
  std::vector<CellResult> cells;
};

// --- per-replication problem construction -------------------------------------

inline Domain make_base_domain(const DomainSpec& s, long d) {
  switch (s.kind) {
    case DomainKind::rd: return Domain::whole();
    case DomainKind::ball: return Domain::ball(d, s.radius);
    case DomainKind::box: return Domain::box(d, s.bounds.first, s.bounds.second);
  }
  return Domain::whole();
}

/// Largest s in (0, 1] with s * p inside the domain (found by bisection; the
/// domain is convex and contains the origin).
inline double feasible_scale(const WorkingDomain& dom, const Vector& p) {
  if (dom.contains(p)) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (dom.contains(mid * p) ? lo : hi) = mid;
  }
  return lo;
}

/// quadratic.random with b scaled down until w* lies in the working domain.
inline QuadraticInstance draw_random_quadratic(const ExperimentConfig& c, long d, const WorkingDomain& dom, Rng& rng) {
  QuadraticInstance q = random_quadratic(d, c.instance_lambda(), c.instance.b_norm, rng);
  const double s = feasible_scale(dom, q.minimizer());
  if (s < 1.0) q = QuadraticInstance(q.A(), s * q.b(), q.c());
  return q;
}

template <class F>
void require_interior_minimizer(const F& f, const WorkingDomain& dom) {
  if (!dom.contains(f.minimizer(), 1e-9))
    throw ConfigError("the instance minimizer lies outside the working domain; enlarge domain.B or the domain");
}

template <Objective F, class Run>
ReplicationOutcome evaluate_replication(const F& f, Run&& run) {
  ReplicationOutcome out;
  RegretAccumulator<F> acc(f);
  RunRecord rec = run([&](long, const GradientSample& s) { acc.add(s.query_point); });
  const double fstar = f.min_value();
  out.error = f.value(rec.returned_point) - fstar;
  out.regret = acc.average_regret();
  out.mean_played_error = f.value(rec.mean_played_point()) - fstar;
  out.ok = std::isfinite(out.error) && std::isfinite(out.regret);
  if (!out.ok) out.failure = "non-finite error or regret";
  return out;
}

/// One replication of one cell. Failures of the run itself are reported in
/// the outcome; configuration problems propagate as ConfigError.
inline ReplicationOutcome run_replication(const ExperimentConfig& c, long d, long T, const WorkingDomain& dom,
                                          long k) {
  const std::uint64_t seed_k = split_seed(c.base_seed, std::uint64_t(k));
  Rng inst_rng(c.instance.seed ? *c.instance.seed : split_seed(seed_k, 0));

  SolverConfig sc;
  sc.T = T;
  sc.lambda = c.step_lambda();
  sc.epsilon = c.domain.epsilon;
  sc.noise = NoiseModel{c.noise_kind()};
  sc.seed = split_seed(seed_k, 1);

  try {
    switch (c.instance.family) {
      case Family::quadratic_random: {
        const QuadraticInstance q = draw_random_quadratic(c, d, dom, inst_rng);
        return evaluate_replication(q, [&](auto obs) { return run_algorithm1(q, dom, sc, obs); });
      }
      case Family::quadratic_hard:
      case Family::smooth_hard: {
        const HardInstance h = c.instance.family == Family::quadratic_hard
                                   ? sample_hard_quadratic(d, T, inst_rng, c.instance.mu_override)
                                   : sample_hard_smooth(d, T, inst_rng, c.instance.mu_override);
        require_interior_minimizer(h, dom);
        return evaluate_replication(h, [&](auto obs) { return run_algorithm1(h, dom, sc, obs); });
      }
      case Family::ridge_stream: {
        const RidgeSampler ridge = random_ridge_sampler(d, c.instance_lambda(), inst_rng);
        const DecomposableOracle o = ridge.to_oracle(dom.B());
        require_interior_minimizer(o, dom);
        if (c.algorithm == Algorithm::alg2)
          return evaluate_replication(o, [&](auto obs) { return run_algorithm2(o, dom, sc, obs); });
        const auto oracle = decomposable_value_oracle(o);
        return evaluate_replication(o, [&](auto obs) { return run_algorithm1_oracle(oracle, d, dom, sc, obs); });
      }
    }
  } catch (const RunAborted& e) {
    ReplicationOutcome out;
    out.failure = e.what();
    return out;
  }
  return {};
}

/// Runs every replication on `jobs` threads; results land at their index.
inline std::vector<ReplicationOutcome> run_replications(const ExperimentConfig& c, long d, long T,
                                                        const WorkingDomain& dom, unsigned jobs) {
  std::vector<ReplicationOutcome> out(std::size_t(c.replications));
  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> stop{false};
  std::mutex error_mutex;
  auto worker = [&] {
    for (long k; !stop && (k = next++) < c.replications;) {
      try {
        out[std::size_t(k)] = run_replication(c, d, T, dom, k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        stop = true;
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, unsigned(c.replications)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

inline CellResult run_cell(const ExperimentConfig& c, long d, long T, const RunOptions& opt) {
  const WorkingDomain dom =
      build_working_domain(make_base_domain(c.domain, d), c.domain.B, c.domain.epsilon, c.domain.mode);
  const auto start = std::chrono::steady_clock::now();
  const auto outcomes = run_replications(c, d, T, dom, opt.jobs);
  const auto stop = std::chrono::steady_clock::now();

  CellResult cell;
  cell.d = d;
  cell.T = T;
  cell.lambda = c.step_lambda();
  cell.epsilon = c.domain.epsilon;
  cell.noise = c.noise_kind();
  std::vector<double> errors, regrets;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const auto& o = outcomes[k];
    if (!o.ok) {
      ++cell.failed;
      cell.failures.push_back("replication " + std::to_string(k) + ": " + o.failure);
      continue;
    }
    errors.push_back(o.error);
    regrets.push_back(o.regret);
    if (o.regret < o.mean_played_error - 1e-9) ++cell.jensen_violations;
  }
  cell.replications = long(errors.size());
  cell.error = summarize(errors);
  cell.regret = summarize(regrets);
  if (errors.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    cell.error = {nan, nan, nan, nan, 0};
    cell.regret = cell.error;
  }
  if (opt.record_timing) cell.wall_time_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  if (opt.retain_reps) {
    cell.rep_errors = std::move(errors);
    cell.rep_regrets = std::move(regrets);
  }
  return cell;
}

/// Cells in sweep order (a single cell without a sweep axis). Every cell reuses
/// the same replication seeds.
inline ExperimentResult run_experiment(const ExperimentConfig& c, const RunOptions& opt = {}) {
  validate(c);
  ExperimentResult r;
  r.algorithm = c.algorithm;
  r.family = c.instance.family;
  r.config_hash = config_hash(c);
  r.seed = c.base_seed;
  if (!c.sweep_T.empty()) {
    for (long T : c.sweep_T) r.cells.push_back(run_cell(c, c.instance.d, T, opt));
  } else if (!c.sweep_d.empty()) {
    for (long d : c.sweep_d) r.cells.push_back(run_cell(c, d, c.T, opt));
  } else {
    r.cells.push_back(run_cell(c, c.instance.d, c.T, opt));
  }
  return r;
}

// --- sweeps -------------------------------------------------------------------

enum class SweepAxis { T, d };

inline std::string_view to_string(SweepAxis a) { return a == SweepAxis::T ? "T" : "d"; }

/// Expected log-log slope of the error along an axis.
inline double target_exponent(Algorithm alg, Family fam, SweepAxis axis) {
  if (fam == Family::smooth_hard) return axis == SweepAxis::T ? -0.5 : 1.0;
  if (alg == Algorithm::alg2) return axis == SweepAxis::T ? -1.0 : 1.0;
  return axis == SweepAxis::T ? -1.0 : 2.0;
}

struct SweepOutcome {
  ExperimentResult result;
  SweepAxis axis = SweepAxis::T;
  RateFit fit;
  double target = 0.0;
  std::vector<std::string> excluded;  // cells left out of the fit
};

/// Fits log mean_error against the axis, skipping cells with no usable mean.
inline SweepOutcome fit_cells(ExperimentResult result, SweepAxis axis, double target) {
  SweepOutcome s;
  s.axis = axis;
  s.target = target;
  std::vector<std::pair<double, double>> xy;
  for (const auto& cell : result.cells) {
    const double x = axis == SweepAxis::T ? double(cell.T) : double(cell.d);
    const std::string at = std::string(to_string(axis)) + "=" + detail::fmt_num(x);
    if (cell.replications == 0 || !(cell.error.mean > 0.0) || !std::isfinite(cell.error.mean)) {
      s.excluded.push_back(at + " (no usable mean error)");
      continue;
    }
    if (cell.failed > 0) s.excluded.push_back(at + " kept, " + std::to_string(cell.failed) + " failed replications");
    xy.emplace_back(x, cell.error.mean);
  }
  if (xy.size() < 3) throw ConfigError("rate fit needs at least 3 usable cells, got " + std::to_string(xy.size()));
  s.fit = fit_rate(xy);
  s.result = std::move(result);
  return s;
}

inline SweepOutcome sweep_and_fit(const ExperimentConfig& c, const RunOptions& opt = {}) {
  if (!c.has_sweep()) throw ConfigError("sweep needs sweep.T or sweep.d");
  const SweepAxis axis = c.sweep_T.empty() ? SweepAxis::d : SweepAxis::T;
  const std::size_t n = axis == SweepAxis::T ? c.sweep_T.size() : c.sweep_d.size();
  if (n < 3) throw ConfigError("sweep axis needs at least 3 values");
  return fit_cells(run_experiment(c, opt), axis, target_exponent(c.algorithm, c.instance.family, axis));
}

}  // namespace dfolab
