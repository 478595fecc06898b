#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dfolab/core.hpp"
#include "dfolab/instances.hpp"

namespace dfolab {

// --- error and regret -------------------------------------------------------

/// F(point) - F(w*).
template <Objective F>
double optimization_error(const F& f, const Vector& point) {
  return f.value(point) - f.min_value();
}

/// (1/T) sum_t F(p_t) - F(w*) over the played points.
template <Objective F>
double average_regret(const F& f, std::span<const Vector> played) {
  require(!played.empty(), "average_regret: no played points");
  double s = 0.0;
  for (const auto& p : played) s += f.value(p);
  return s / double(played.size()) - f.min_value();
}

/// Streaming form of average_regret, for runs whose trajectory is not kept.
template <Objective F>
class RegretAccumulator {
 public:
  explicit RegretAccumulator(const F& f) : f_(&f) {}
  void add(const Vector& p) {
    sum_ += f_->value(p);
    ++count_;
  }
  long count() const { return count_; }
  double mean_value() const { return sum_ / double(count_); }
  double average_regret() const {
    require(count_ > 0, "RegretAccumulator: no played points");
    return mean_value() - f_->min_value();
  }

 private:
  const F* f_;
  double sum_ = 0.0;
  long count_ = 0;
};

/// Number of coordinates where point and e have strictly opposite signs.
inline int sign_disagreement(const Vector& point, const Vector& e) {
  require_dim(point, e.size(), "sign_disagreement");
  int n = 0;
  for (Eigen::Index i = 0; i < e.size(); ++i)
    if (point[i] * e[i] < 0.0) ++n;
  return n;
}

// --- Gaussian KL --------------------------------------------------------------

/// KL(N(mu1, sigma^2) || N(mu2, sigma^2)) = (mu1 - mu2)^2 / (2 sigma^2).
inline double kl_gaussians(double mu1, double mu2, double sigma) {
  require(sigma > 0.0, "kl_gaussians: sigma must be positive");
  const double d = mu1 - mu2;
  return d * d / (2.0 * sigma * sigma);
}

// --- bound catalog --------------------------------------------------------------

struct BoundParams {
  double d = 1;
  double T = 1;
  double lambda = 1;
  double epsilon = 1;
  double B = 1;
  double N = 0;
  double frobenius_sq = 1;  // E[|A_hat|_F^2]
};

/// 4 (4 + 5 ln 2), the suffix-averaging SGD constant.
inline double sgd_suffix_constant() { return 4.0 * (4.0 + 5.0 * std::log(2.0)); }

namespace bounds {

inline double lemma1_moment(const BoundParams& p) {
  return 4.0 * p.d * p.d * std::pow(p.B + 1.0, 4) / (p.epsilon * p.epsilon);
}

inline double lemma7_moment(const BoundParams& p) {
  return 4.0 * (p.N * p.N + 3.0 * p.d * (std::pow(p.B + 1.0, 4) + p.frobenius_sq));
}

/// Error upper bound of algorithm 1.
inline double thm1_upper(const BoundParams& p) {
  return sgd_suffix_constant() * std::pow(p.B + 1.0, 4) / (p.lambda * p.epsilon * p.epsilon) * (p.d * p.d / p.T);
}

/// Error lower bound on the hard quadratic family.
inline double thm2_lower(const BoundParams& p) { return 0.01 * std::min(1.0, p.d * p.d / p.T); }

/// Average-regret lower bound on the hard quadratic family.
inline double thm3_lower(const BoundParams& p) { return 0.02 * std::min(1.0, std::sqrt(p.d * p.d / p.T)); }

/// Error lower bound on the smooth hard family.
inline double thm4_lower(const BoundParams& p) { return 0.004 * std::min(1.0, std::sqrt(p.d * p.d / p.T)); }

/// Error upper bound of algorithm 2.
inline double thm5_upper(const BoundParams& p) {
  return sgd_suffix_constant() * (p.N * p.N + 3.0 * p.d * (std::pow(p.B + 1.0, 4) + p.frobenius_sq)) /
         (p.lambda * p.T);
}

}  // namespace bounds

inline const std::vector<std::string_view>& bound_names() {
  static const std::vector<std::string_view> names{"thm1_upper", "thm2_lower",    "thm3_lower",   "thm4_lower",
                                                   "thm5_upper", "lemma1_moment", "lemma7_moment"};
  return names;
}

/// Closed-form bound by name. Unknown names are a contract violation.
inline double bound(std::string_view name, const BoundParams& p) {
  if (name == "thm1_upper") return bounds::thm1_upper(p);
  if (name == "thm2_lower") return bounds::thm2_lower(p);
  if (name == "thm3_lower") return bounds::thm3_lower(p);
  if (name == "thm4_lower") return bounds::thm4_lower(p);
  if (name == "thm5_upper") return bounds::thm5_upper(p);
  if (name == "lemma1_moment") return bounds::lemma1_moment(p);
  if (name == "lemma7_moment") return bounds::lemma7_moment(p);
  throw ContractViolation("bound: unknown name '" + std::string(name) + "'");
}

// --- summaries and rate fits --------------------------------------------------

/// Mean with a normal-approximation 95% interval (mean +- 1.96 stderr).
struct MeanCI {
  double mean = 0.0;
  double stderr_ = 0.0;
  double low = 0.0;
  double high = 0.0;
  long n = 0;
};

inline MeanCI summarize(std::span<const double> xs) {
  MeanCI s;
  s.n = long(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / double(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = std::sqrt(ss / double(xs.size() - 1) / double(xs.size()));
  }
  s.low = s.mean - 1.96 * s.stderr_;
  s.high = s.mean + 1.96 * s.stderr_;
  return s;
}

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (log x, log y)
};

/// Ordinary least squares of log y on log x.
inline RateFit fit_rate(std::span<const std::pair<double, double>> xy) {
  require(xy.size() >= 3, "fit_rate: need at least 3 points");
  RateFit fit;
  for (const auto& [x, y] : xy) {
    require(x > 0.0 && y > 0.0, "fit_rate: values must be positive");
    fit.points.emplace_back(std::log(x), std::log(y));
  }
  const double n = double(fit.points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [u, v] : fit.points) {
    mx += u;
    my += v;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [u, v] : fit.points) {
    sxx += (u - mx) * (u - mx);
    sxy += (u - mx) * (v - my);
    syy += (v - my) * (v - my);
  }
  require(sxx > 0.0, "fit_rate: x values must not all be equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [u, v] : fit.points) {
    const double e = v - (fit.intercept + fit.slope * u);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

// --- smooth-family property checks -------------------------------------------

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// y (3 - y^2) / (1 + y^2)^3: the curvature of g_a is 2 (1 + this), y = x/a.
inline double smooth_curvature_factor(double y) {
  const double q = 1.0 + y * y;
  return y * (3.0 - y * y) / (q * q * q);
}

struct Lemma6Report {
  double curvature_factor_max = 0.0;
  double curvature_factor_argmax = 0.0;
  double minimizer_constant = 0.0;
  double flip_max_ratio = 0.0;        // max over grid of |g_mu - g_-mu| / mu^2
  double flip_equality_error = 0.0;   // max | |g_mu(+-mu) - g_-mu(+-mu)| - mu^2 |
  double gradient_max_ratio = 0.0;    // max |g'_a(x)| / (2|x| + |a|)
  std::vector<CheckResult> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  }
};

namespace detail {
inline std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}
}  // namespace detail

/// Numerical verification of the four smooth-family properties: curvature
/// factor at most 3/4, minimizer constant 0.3489, flip bound mu^2 with equality
/// at x = +-mu, and |g'_a(x)| <= 2|x| + |a|.
inline Lemma6Report verify_lemma6(std::uint64_t seed = 20240601) {
  Lemma6Report rep;

  // (1) grid on [-100, 100] with step 1e-3, then golden-section refinement.
  {
    const long n = 200000;
    double best = -1.0, best_y = 0.0;
    for (long i = 0; i <= n; ++i) {
      const double y = -100.0 + 1e-3 * double(i);
      const double v = std::abs(smooth_curvature_factor(y));
      if (v > best) {
        best = v;
        best_y = y;
      }
    }
    const double y_ref = golden_section_minimize([](double y) { return -std::abs(smooth_curvature_factor(y)); },
                                                 best_y - 1e-3, best_y + 1e-3, 1e-12);
    const double v_ref = std::abs(smooth_curvature_factor(y_ref));
    if (v_ref > best) {
      best = v_ref;
      best_y = y_ref;
    }
    rep.curvature_factor_max = best;
    rep.curvature_factor_argmax = best_y;
    rep.checks.push_back({"lemma6.curvature_factor", best <= 0.75,
                          "max |y(3-y^2)/(1+y^2)^3| = " + detail::fmt_num(best) + " at y = " +
                              detail::fmt_num(best_y) + " (limit 0.75)"});
  }

  // (2) minimizer constant.
  {
    const double c = smooth_minimizer_constant();
    rep.minimizer_constant = c;
    rep.checks.push_back({"lemma6.minimizer_constant", std::abs(c - 0.3489) <= 5e-4,
                          "c* = " + detail::fmt_num(c) + " (expected 0.3489 +- 5e-4)"});
  }

  // (3) flip bound on a grid of 1e5 points for several mu.
  {
    bool ok = true;
    std::string witness;
    double worst = 0.0, eq_err = 0.0;
    for (double mu : {1e-3, 1e-2, 0.1, 0.5, 1.0}) {
      const long n = 100000;
      for (long i = 0; i < n; ++i) {
        const double x = -10.0 * mu + 20.0 * mu * double(i) / double(n - 1);
        const double diff = std::abs(smooth_component(mu, x) - smooth_component(-mu, x));
        worst = std::max(worst, diff / (mu * mu));
        if (diff > mu * mu * (1.0 + 1e-12) && ok) {
          ok = false;
          witness = " witness mu=" + detail::fmt_num(mu) + " x=" + detail::fmt_num(x);
        }
      }
      for (double x : {mu, -mu}) {
        const double diff = std::abs(smooth_component(mu, x) - smooth_component(-mu, x));
        eq_err = std::max(eq_err, std::abs(diff - mu * mu));
      }
    }
    rep.flip_max_ratio = worst;
    rep.flip_equality_error = eq_err;
    const bool eq_ok = eq_err <= 1e-12;
    if (!eq_ok) witness += " equality error " + detail::fmt_num(eq_err);
    rep.checks.push_back({"lemma6.flip_bound", ok && eq_ok,
                          "max |g_mu - g_-mu|/mu^2 = " + detail::fmt_num(worst) + ", equality error at +-mu = " +
                              detail::fmt_num(eq_err) + witness});
  }

  // (4) gradient magnitude on 1e5 random samples.
  {
    Rng rng(seed);
    std::uniform_real_distribution<double> ux(-5.0, 5.0), ua(1e-3, 2.0);
    bool ok = true;
    std::string witness;
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const double a = ((rng() & 1U) ? 1.0 : -1.0) * ua(rng);
      const double x = ux(rng);
      const double g = std::abs(smooth_component_derivative(a, x));
      const double lim = 2.0 * std::abs(x) + std::abs(a);
      worst = std::max(worst, g / lim);
      if (g > lim * (1.0 + 1e-12) && ok) {
        ok = false;
        witness = " witness a=" + detail::fmt_num(a) + " x=" + detail::fmt_num(x);
      }
    }
    rep.gradient_max_ratio = worst;
    rep.checks.push_back({"lemma6.gradient_bound", ok,
                          "max |g'_a(x)|/(2|x|+|a|) = " + detail::fmt_num(worst) + witness});
  }
  return rep;
}

}  // namespace dfolab
