#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dfolab/core.hpp"
#include "dfolab/domains.hpp"
#include "dfolab/noise.hpp"

namespace dfolab {

enum class Algorithm { alg1, alg2 };
enum class Family { quadratic_random, quadratic_hard, smooth_hard, ridge_stream };
enum class DomainKind { rd, ball, box };

inline std::string_view to_string(Algorithm a) { return a == Algorithm::alg1 ? "alg1" : "alg2"; }

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::quadratic_random: return "quadratic.random";
    case Family::quadratic_hard: return "quadratic.hard";
    case Family::smooth_hard: return "smooth.hard";
    case Family::ridge_stream: return "ridge.stream";
  }
  return "?";
}

inline std::string_view to_string(DomainKind k) {
  switch (k) {
    case DomainKind::rd: return "rd";
    case DomainKind::ball: return "ball";
    case DomainKind::box: return "box";
  }
  return "?";
}

struct InstanceSpec {
  Family family = Family::quadratic_random;
  long d = 5;
  std::optional<double> lambda;  // quadratic.random and ridge.stream only
  std::optional<std::uint64_t> seed;  // fixes the instance across replications
  std::optional<double> mu_override;  // hard families only
  double b_norm = 0.5;                // quadratic.random only
};

struct DomainSpec {
  DomainKind kind = DomainKind::rd;
  double radius = 1.0;
  std::pair<double, double> bounds{-1.0, 1.0};
  double B = 1.0;
  double epsilon = 1.0;
  DomainMode mode = DomainMode::exterior_query;
};

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::alg1;
  InstanceSpec instance;
  DomainSpec domain;
  long T = 1024;
  std::optional<double> solver_lambda;
  std::optional<NoiseKind> noise;
  long replications = 100;
  std::uint64_t base_seed = 1;
  std::vector<long> sweep_T;
  std::vector<long> sweep_d;
  bool retain_reps = false;

  double instance_lambda() const {
    switch (instance.family) {
      case Family::quadratic_hard: return 1.0;
      case Family::smooth_hard: return 0.5;
      default: return instance.lambda.value_or(1.0);
    }
  }
  double step_lambda() const { return solver_lambda.value_or(instance_lambda()); }
  NoiseKind noise_kind() const {
    if (noise) return *noise;
    switch (instance.family) {
      case Family::quadratic_random: return NoiseKind::standard;
      case Family::quadratic_hard: return NoiseKind::lower_bound;
      case Family::smooth_hard: return NoiseKind::unit;
      case Family::ridge_stream: return NoiseKind::none;
    }
    return NoiseKind::standard;
  }
  bool has_sweep() const { return !sweep_T.empty() || !sweep_d.empty(); }
};

// --- flat key = value parsing -------------------------------------------------

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

inline std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

inline long to_long(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != double(long(x))) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return long(x);
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size() || v.front() == '-') throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
}

inline std::vector<std::string> to_list(const std::string& key, const std::string& v) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    throw ConfigError("key '" + key + "': expected a list like [1, 2, 3]");
  std::vector<std::string> out;
  std::stringstream ss(v.substr(1, v.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<long> to_long_list(const std::string& key, const std::string& v) {
  std::vector<long> out;
  for (const auto& s : to_list(key, v)) out.push_back(to_long(key, s));
  return out;
}

}  // namespace config_detail

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "algorithm",       "replications",   "base_seed",       "instance.family", "instance.d",
      "instance.lambda", "instance.seed",  "instance.mu-override", "instance.b_norm", "domain.kind",
      "domain.radius",   "domain.bounds",  "domain.B",        "domain.epsilon",  "domain.mode",
      "solver.T",        "solver.lambda",  "solver.epsilon",  "solver.noise",    "sweep.T",
      "sweep.d"};
  return keys;
}

/// Reads `key = value` lines into a map. Duplicate or unknown keys are errors.
inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
  using namespace config_detail;
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!known_config_keys().count(key))
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
    if (!kv.emplace(key, value).second)
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return kv;
}

inline void validate(const ExperimentConfig& c) {
  auto increasing = [](const std::vector<long>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] <= v[i - 1]) return false;
    return true;
  };
  if (c.instance.d < 1) throw ConfigError("instance.d must be positive");
  if (c.T < 2 || c.T % 2 != 0) throw ConfigError("solver.T must be a positive even integer");
  if (c.replications < 1) throw ConfigError("replications must be positive");
  if (!(c.domain.epsilon > 0.0 && c.domain.epsilon <= 1.0)) throw ConfigError("epsilon must lie in (0, 1]");
  if (!(c.domain.B > 0.0)) throw ConfigError("domain.B must be positive");
  if (!c.sweep_T.empty() && !c.sweep_d.empty()) throw ConfigError("sweep one axis at a time (sweep.T or sweep.d)");
  if (!increasing(c.sweep_T) || !increasing(c.sweep_d)) throw ConfigError("sweep lists must be strictly increasing");
  for (long T : c.sweep_T)
    if (T < 2 || T % 2 != 0) throw ConfigError("sweep.T entries must be positive even integers");
  for (long d : c.sweep_d)
    if (d < 1) throw ConfigError("sweep.d entries must be positive");
  if (c.algorithm == Algorithm::alg2 && c.instance.family != Family::ridge_stream)
    throw ConfigError("alg2 needs a decomposable oracle (instance.family = ridge.stream)");
  const bool hard = c.instance.family == Family::quadratic_hard || c.instance.family == Family::smooth_hard;
  if (hard && c.instance.lambda) throw ConfigError("instance.lambda is fixed by the hard families");
  if (!hard && c.instance.mu_override) throw ConfigError("instance.mu-override applies to hard families only");
  if (c.instance.mu_override && !(*c.instance.mu_override > 0.0)) throw ConfigError("instance.mu-override must be positive");
  if (c.instance.family == Family::quadratic_random) {
    const double l = c.instance_lambda();
    if (!(l > 0.0 && l <= 1.0)) throw ConfigError("instance.lambda must lie in (0, 1] for quadratic.random");
    if (!(c.instance.b_norm >= 0.0 && c.instance.b_norm <= 1.0)) throw ConfigError("instance.b_norm must lie in [0, 1]");
  } else if (c.instance.family == Family::ridge_stream) {
    if (!(c.instance_lambda() > 0.0)) throw ConfigError("instance.lambda must be positive");
  }
  if (!(c.step_lambda() > 0.0)) throw ConfigError("solver.lambda must be positive");
  if (c.domain.kind == DomainKind::ball && !(c.domain.radius > 0.0)) throw ConfigError("domain.radius must be positive");
  if (c.domain.kind == DomainKind::box && !(c.domain.bounds.first < c.domain.bounds.second))
    throw ConfigError("domain.bounds must satisfy lower < upper");
}

inline ExperimentConfig config_from_key_values(const std::map<std::string, std::string>& kv) {
  using namespace config_detail;
  ExperimentConfig c;
  std::optional<double> solver_eps, domain_eps;
  for (const auto& [key, raw] : kv) {
    const std::string v = unquote(raw);
    if (key == "algorithm") {
      if (v == "alg1") c.algorithm = Algorithm::alg1;
      else if (v == "alg2") c.algorithm = Algorithm::alg2;
      else throw ConfigError("algorithm must be alg1 or alg2, got '" + v + "'");
    } else if (key == "replications") {
      c.replications = to_long(key, v);
    } else if (key == "base_seed") {
      c.base_seed = to_u64(key, v);
    } else if (key == "instance.family") {
      if (v == "quadratic.random") c.instance.family = Family::quadratic_random;
      else if (v == "quadratic.hard") c.instance.family = Family::quadratic_hard;
      else if (v == "smooth.hard") c.instance.family = Family::smooth_hard;
      else if (v == "ridge.stream") c.instance.family = Family::ridge_stream;
      else throw ConfigError("unknown instance.family '" + v + "'");
    } else if (key == "instance.d") {
      c.instance.d = to_long(key, v);
    } else if (key == "instance.lambda") {
      c.instance.lambda = to_double(key, v);
    } else if (key == "instance.seed") {
      c.instance.seed = to_u64(key, v);
    } else if (key == "instance.mu-override") {
      c.instance.mu_override = to_double(key, v);
    } else if (key == "instance.b_norm") {
      c.instance.b_norm = to_double(key, v);
    } else if (key == "domain.kind") {
      if (v == "rd") c.domain.kind = DomainKind::rd;
      else if (v == "ball") c.domain.kind = DomainKind::ball;
      else if (v == "box") c.domain.kind = DomainKind::box;
      else throw ConfigError("domain.kind must be rd, ball or box, got '" + v + "'");
    } else if (key == "domain.radius") {
      c.domain.radius = to_double(key, v);
    } else if (key == "domain.bounds") {
      const auto items = to_list(key, v);
      if (items.size() != 2) throw ConfigError("domain.bounds must be [lower, upper]");
      c.domain.bounds = {to_double(key, items[0]), to_double(key, items[1])};
    } else if (key == "domain.B") {
      c.domain.B = to_double(key, v);
    } else if (key == "domain.epsilon") {
      domain_eps = to_double(key, v);
    } else if (key == "domain.mode") {
      const auto m = parse_domain_mode(v);
      if (!m) throw ConfigError("domain.mode must be interior_optimum or exterior_query, got '" + v + "'");
      c.domain.mode = *m;
    } else if (key == "solver.T") {
      c.T = to_long(key, v);
    } else if (key == "solver.lambda") {
      c.solver_lambda = to_double(key, v);
    } else if (key == "solver.epsilon") {
      solver_eps = to_double(key, v);
    } else if (key == "solver.noise") {
      const auto n = parse_noise_kind(v);
      if (!n) throw ConfigError("solver.noise must be none, standard, lower_bound or unit, got '" + v + "'");
      c.noise = *n;
    } else if (key == "sweep.T") {
      c.sweep_T = to_long_list(key, v);
    } else if (key == "sweep.d") {
      c.sweep_d = to_long_list(key, v);
    }
  }
  if (solver_eps && domain_eps && *solver_eps != *domain_eps)
    throw ConfigError("solver.epsilon and domain.epsilon disagree");
  c.domain.epsilon = domain_eps.value_or(solver_eps.value_or(1.0));
  validate(c);
  return c;
}

inline ExperimentConfig parse_config(std::istream& in) { return config_from_key_values(parse_key_values(in)); }

inline ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

/// Canonical text of the effective configuration; the basis of the config hash.
inline std::string canonical_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os.precision(17);
  auto list = [&](const std::vector<long>& v) {
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ']';
  };
  os << "algorithm=" << to_string(c.algorithm) << '\n'
     << "base_seed=" << c.base_seed << '\n'
     << "domain.B=" << c.domain.B << '\n'
     << "domain.bounds=[" << c.domain.bounds.first << ',' << c.domain.bounds.second << "]\n"
     << "domain.epsilon=" << c.domain.epsilon << '\n'
     << "domain.kind=" << to_string(c.domain.kind) << '\n'
     << "domain.mode=" << to_string(c.domain.mode) << '\n'
     << "domain.radius=" << c.domain.radius << '\n'
     << "instance.b_norm=" << c.instance.b_norm << '\n'
     << "instance.d=" << c.instance.d << '\n'
     << "instance.family=" << to_string(c.instance.family) << '\n'
     << "instance.lambda=" << c.instance_lambda() << '\n'
     << "instance.mu-override=" << (c.instance.mu_override ? std::to_string(*c.instance.mu_override) : "-") << '\n'
     << "instance.seed=" << (c.instance.seed ? std::to_string(*c.instance.seed) : "-") << '\n'
     << "replications=" << c.replications << '\n'
     << "solver.T=" << c.T << '\n'
     << "solver.lambda=" << c.step_lambda() << '\n'
     << "solver.noise=" << to_string(c.noise_kind()) << '\n'
     << "sweep.T=";
  list(c.sweep_T);
  os << "\nsweep.d=";
  list(c.sweep_d);
  os << '\n';
  return os.str();
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t config_hash(const ExperimentConfig& c) { return fnv1a64(canonical_config(c)); }

}  // namespace dfolab
