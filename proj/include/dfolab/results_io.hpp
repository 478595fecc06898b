#pragma once

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dfolab/experiment.hpp"

namespace dfolab {

enum class OutputFormat { csv, json };

inline std::optional<OutputFormat> parse_output_format(std::string_view s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  return std::nullopt;
}

/// One CSV line.
struct ResultRow {
  std::string run_id;
  std::string algorithm;
  std::string family;
  long d = 0;
  long T = 0;
  double lambda = 0.0;
  double epsilon = 0.0;
  std::string noise;
  long replications = 0;
  std::uint64_t seed = 0;
  double mean_error = 0.0;
  double error_ci_low = 0.0;
  double error_ci_high = 0.0;
  double mean_regret = 0.0;
  double regret_ci_low = 0.0;
  double regret_ci_high = 0.0;
  double wall_time_ms = 0.0;
};

inline constexpr std::string_view kCsvHeader =
    "run_id,algorithm,family,d,T,lambda,epsilon,noise,replications,seed,mean_error,error_ci_low,error_ci_high,"
    "mean_regret,regret_ci_low,regret_ci_high,wall_time_ms";

namespace io_detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

inline double parse_double(const std::string& s, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw ConfigError("results line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

inline long parse_long(const std::string& s, int line) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') throw ConfigError("results line " + std::to_string(line) + ": bad integer '" + s + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& s, int line) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') throw ConfigError("results line " + std::to_string(line) + ": bad seed '" + s + "'");
  return v;
}

inline nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace io_detail

inline std::vector<ResultRow> result_rows(const ExperimentResult& r) {
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const CellResult& c = r.cells[i];
    ResultRow row;
    row.run_id = io_detail::hex64(r.config_hash) + "-" + std::to_string(i);
    row.algorithm = std::string(to_string(r.algorithm));
    row.family = std::string(to_string(r.family));
    row.d = c.d;
    row.T = c.T;
    row.lambda = c.lambda;
    row.epsilon = c.epsilon;
    row.noise = std::string(to_string(c.noise));
    row.replications = c.replications;
    row.seed = r.seed;
    row.mean_error = c.error.mean;
    row.error_ci_low = c.error.low;
    row.error_ci_high = c.error.high;
    row.mean_regret = c.regret.mean;
    row.regret_ci_low = c.regret.low;
    row.regret_ci_high = c.regret.high;
    row.wall_time_ms = c.wall_time_ms;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string to_csv(const std::vector<ResultRow>& rows) {
  using io_detail::num;
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.run_id + ',' + r.algorithm + ',' + r.family + ',' + std::to_string(r.d) + ',' + std::to_string(r.T) +
           ',' + num(r.lambda) + ',' + num(r.epsilon) + ',' + r.noise + ',' + std::to_string(r.replications) + ',' +
           std::to_string(r.seed) + ',' + num(r.mean_error) + ',' + num(r.error_ci_low) + ',' +
           num(r.error_ci_high) + ',' + num(r.mean_regret) + ',' + num(r.regret_ci_low) + ',' +
           num(r.regret_ci_high) + ',' + num(r.wall_time_ms) + '\n';
  }
  return out;
}

inline std::string to_csv(const ExperimentResult& r) { return to_csv(result_rows(r)); }

/// One object per cell with the CSV fields, plus failure and audit details.
inline std::string to_json(const ExperimentResult& r) {
  using nlohmann::ordered_json;
  using io_detail::number_or_null;
  ordered_json doc;
  doc["provenance"] = {{"config_hash", io_detail::hex64(r.config_hash)}, {"seed", r.seed}, {"version", r.version}};
  ordered_json cells = ordered_json::array();
  const auto rows = result_rows(r);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ResultRow& row = rows[i];
    const CellResult& c = r.cells[i];
    ordered_json j;
    j["run_id"] = row.run_id;
    j["algorithm"] = row.algorithm;
    j["family"] = row.family;
    j["d"] = row.d;
    j["T"] = row.T;
    j["lambda"] = row.lambda;
    j["epsilon"] = row.epsilon;
    j["noise"] = row.noise;
    j["replications"] = row.replications;
    j["seed"] = row.seed;
    j["mean_error"] = number_or_null(row.mean_error);
    j["error_ci_low"] = number_or_null(row.error_ci_low);
    j["error_ci_high"] = number_or_null(row.error_ci_high);
    j["mean_regret"] = number_or_null(row.mean_regret);
    j["regret_ci_low"] = number_or_null(row.regret_ci_low);
    j["regret_ci_high"] = number_or_null(row.regret_ci_high);
    j["wall_time_ms"] = row.wall_time_ms;
    j["failed_replications"] = c.failed;
    if (!c.failures.empty()) j["failures"] = c.failures;
    if (!c.rep_errors.empty()) {
      j["replication_errors"] = c.rep_errors;
      j["replication_regrets"] = c.rep_regrets;
    }
    cells.push_back(std::move(j));
  }
  doc["cells"] = std::move(cells);
  return doc.dump(2) + "\n";
}

inline std::string render(const ExperimentResult& r, OutputFormat f) {
  return f == OutputFormat::csv ? to_csv(r) : to_json(r);
}

/// Writes the result; I/O failures throw std::runtime_error naming the path.
inline void write_results(const ExperimentResult& r, const std::string& path, OutputFormat f) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << render(r, f);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::vector<ResultRow> parse_results_csv(std::istream& in) {
  using namespace io_detail;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("results file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ConfigError("results file has an unexpected header");
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 17) throw ConfigError("results line " + std::to_string(lineno) + ": expected 17 fields");
    ResultRow r;
    r.run_id = f[0];
    r.algorithm = f[1];
    r.family = f[2];
    r.d = parse_long(f[3], lineno);
    r.T = parse_long(f[4], lineno);
    r.lambda = parse_double(f[5], lineno);
    r.epsilon = parse_double(f[6], lineno);
    r.noise = f[7];
    r.replications = parse_long(f[8], lineno);
    r.seed = parse_u64(f[9], lineno);
    r.mean_error = parse_double(f[10], lineno);
    r.error_ci_low = parse_double(f[11], lineno);
    r.error_ci_high = parse_double(f[12], lineno);
    r.mean_regret = parse_double(f[13], lineno);
    r.regret_ci_low = parse_double(f[14], lineno);
    r.regret_ci_high = parse_double(f[15], lineno);
    r.wall_time_ms = parse_double(f[16], lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open results file '" + path + "'");
  return parse_results_csv(in);
}

/// Re-fits mean_error from a results file along whichever of d and T varies.
inline SweepOutcome refit_rows(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw ConfigError("results file has no rows");
  bool d_varies = false, T_varies = false;
  for (const auto& r : rows) {
    d_varies = d_varies || r.d != rows.front().d;
    T_varies = T_varies || r.T != rows.front().T;
  }
  if (d_varies == T_varies) throw ConfigError("results must vary exactly one of d and T");
  const SweepAxis axis = T_varies ? SweepAxis::T : SweepAxis::d;

  ExperimentResult r;
  const auto alg = rows.front().algorithm;
  const auto fam = rows.front().family;
  r.algorithm = alg == "alg2" ? Algorithm::alg2 : Algorithm::alg1;
  if (fam == "quadratic.hard") r.family = Family::quadratic_hard;
  else if (fam == "smooth.hard") r.family = Family::smooth_hard;
  else if (fam == "ridge.stream") r.family = Family::ridge_stream;
  else r.family = Family::quadratic_random;
  for (const auto& row : rows) {
    CellResult c;
    c.d = row.d;
    c.T = row.T;
    c.replications = row.replications;
    c.error.mean = row.mean_error;
    r.cells.push_back(c);
  }
  const double target = target_exponent(r.algorithm, r.family, axis);
  return fit_cells(std::move(r), axis, target);
}

}  // namespace dfolab
