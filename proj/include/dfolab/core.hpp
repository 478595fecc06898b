#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dfolab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Every stochastic component draws from one of these; a run owns exactly one.
using Rng = std::mt19937_64;

/// Caller broke a documented precondition (dimension mismatch, bad argument).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A user-supplied configuration cannot be realized.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

inline void require_dim(const Vector& w, Eigen::Index d, const char* what) {
  if (w.size() != d)
    throw ContractViolation(std::string(what) + ": dimension mismatch (expected " +
                            std::to_string(d) + ", got " + std::to_string(w.size()) + ")");
}

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives the seed of stream `index` from `base`. Distinct indices map to
/// distinct seeds: the Weyl step is injective mod 2^64 and mix64 is a bijection.
constexpr std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Uniform sign vector in {-1,+1}^d built from independent fair bits.
inline Vector random_signs(Eigen::Index d, Rng& rng) {
  Vector r(d);
  std::uint64_t bits = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (i % 64 == 0) bits = rng();
    r[i] = (bits & 1U) ? 1.0 : -1.0;
    bits >>= 1;
  }
  return r;
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Uniformly distributed direction on the unit sphere in R^d.
inline Vector random_unit_vector(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(d);
  double n = 0.0;
  do {
    for (Eigen::Index i = 0; i < d; ++i) v[i] = normal(rng);
    n = v.norm();
  } while (n == 0.0);
  return v / n;
}

}  // namespace dfolab
