#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>

#include "dfolab/core.hpp"

namespace dfolab {

/// Additive zero-mean Gaussian noise attached to a value query at w.
///   none        : xi = 0
///   standard    : std = max{1, |w|}, so E[xi^2] = max{1, |w|^2}
///   lower_bound : std = max{1, |w|^2}
///   unit        : std = 1
enum class NoiseKind { none, standard, lower_bound, unit };

struct NoiseModel {
  NoiseKind kind = NoiseKind::standard;

  double stddev(const Vector& w) const {
    switch (kind) {
      case NoiseKind::none: return 0.0;
      case NoiseKind::standard: return std::max(1.0, w.norm());
      case NoiseKind::lower_bound: return std::max(1.0, w.squaredNorm());
      case NoiseKind::unit: return 1.0;
    }
    return 0.0;
  }

  double second_moment(const Vector& w) const {
    const double s = stddev(w);
    return s * s;
  }

  /// Draws xi_w. Consumes no randomness for kind none.
  double sample(const Vector& w, Rng& rng) const {
    if (kind == NoiseKind::none) return 0.0;
    return stddev(w) * std::normal_distribution<double>(0.0, 1.0)(rng);
  }
};

inline std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::standard: return "standard";
    case NoiseKind::lower_bound: return "lower_bound";
    case NoiseKind::unit: return "unit";
  }
  return "?";
}

inline std::optional<NoiseKind> parse_noise_kind(std::string_view s) {
  if (s == "none") return NoiseKind::none;
  if (s == "standard") return NoiseKind::standard;
  if (s == "lower_bound") return NoiseKind::lower_bound;
  if (s == "unit") return NoiseKind::unit;
  return std::nullopt;
}

}  // namespace dfolab
