// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dfolab/analysis.hpp"
#include "dfolab/config.hpp"
#include "dfolab/experiment.hpp"
#include "dfolab/results_io.hpp"
#include "dfolab/verify.hpp"

using namespace dfolab;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool passed = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) { return detail::fmt_num(v); }

RunOptions all_threads() {
  RunOptions o;
  o.jobs = std::max(1u, std::thread::hardware_concurrency());
  return o;
}

std::string fit_detail(const SweepOutcome& s) {
  std::string out;
  for (const auto& c : s.result.cells)
    out += std::string(to_string(s.axis)) + "=" + std::to_string(s.axis == SweepAxis::T ? c.T : c.d) + ":" +
           fmt(c.error.mean) + " ";
  return out + "slope " + fmt(s.fit.slope) + " (r^2 " + fmt(s.fit.r_squared) + ")";
}

const char* kRandomQuadratic = R"(
algorithm = "alg1"
replications = 200
instance.family = "quadratic.random"
instance.lambda = 1.0
domain.kind = "rd"
domain.B = 1.0
domain.epsilon = 1.0
)";

Outcome unbiasedness() {
  const auto t0 = Clock::now();
  const CheckResult r = check_unbiasedness(split_seed(kSeed, 1));
  const double secs = seconds_since(t0);
  return {r.passed && secs < 10.0, r.detail + ", " + fmt(secs) + " s (limit 10 s)"};
}

Outcome moments() {
  const auto t0 = Clock::now();
  const CheckResult r = check_moment_bounds(split_seed(kSeed, 2), 100000);
  const double secs = seconds_since(t0);
  return {r.passed && secs < 30.0, r.detail + "; " + fmt(secs) + " s (limit 30 s)"};
}

Outcome thm1_consistency() {
  const auto t0 = Clock::now();
  ExperimentConfig c = parse_config_string(std::string(kRandomQuadratic) +
                                           "instance.d = 5\nbase_seed = 3\nsweep.T = [1024, 8192]\n");
  const ExperimentResult r = run_experiment(c, all_threads());
  bool ok = true;
  std::string d;
  for (const auto& cell : r.cells) {
    BoundParams p;
    p.d = double(cell.d);
    p.T = double(cell.T);
    const double b = bounds::thm1_upper(p);
    ok = ok && cell.replications >= 200 && cell.error.high <= b;
    d += "T=" + std::to_string(cell.T) + ": CI high " + fmt(cell.error.high) + " <= " + fmt(b) + "; ";
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 180.0, d + fmt(secs) + " s (limit 180 s)"};
}

Outcome t_rate() {
  const auto t0 = Clock::now();
  ExperimentConfig c = parse_config_string(std::string(kRandomQuadratic) +
                                           "instance.d = 5\nbase_seed = 4\n"
                                           "sweep.T = [1024, 2048, 4096, 8192, 16384, 32768, 65536]\n");
  const SweepOutcome s = sweep_and_fit(c, all_threads());
  const double secs = seconds_since(t0);
  const bool ok = s.fit.slope >= -1.25 && s.fit.slope <= -0.75 && s.excluded.empty();
  return {ok && secs < 900.0, fit_detail(s) + " in [-1.25, -0.75], " + fmt(secs) + " s (limit 900 s)"};
}

Outcome d_rate_quadratic() {
  ExperimentConfig c = parse_config_string(std::string(kRandomQuadratic) +
                                           "base_seed = 5\nsolver.T = 16384\nsweep.d = [2, 4, 8, 16]\n");
  const SweepOutcome s = sweep_and_fit(c, all_threads());
  return {s.fit.slope >= 1.5 && s.fit.slope <= 2.5 && s.excluded.empty(), fit_detail(s) + " in [1.5, 2.5]"};
}

Outcome d_rate_ridge() {
  ExperimentConfig c = parse_config_string(R"(
algorithm = "alg2"
replications = 200
base_seed = 6
instance.family = "ridge.stream"
instance.lambda = 1.0
domain.kind = "rd"
domain.B = 1.0
solver.T = 16384
sweep.d = [2, 4, 8, 16]
)");
  const SweepOutcome s = sweep_and_fit(c, all_threads());
  return {s.fit.slope >= 0.5 && s.fit.slope <= 1.5 && s.excluded.empty(), fit_detail(s) + " in [0.5, 1.5]"};
}

ExperimentResult hard_quadratic_run() {
  ExperimentConfig c = parse_config_string(R"(
algorithm = "alg1"
replications = 500
base_seed = 7
instance.family = "quadratic.hard"
instance.d = 8
domain.kind = "rd"
domain.B = 1.0
domain.epsilon = 1.0
solver.T = 1024
solver.noise = "lower_bound"
)");
  return run_experiment(c, all_threads());
}

Outcome lower_bound(const ExperimentResult& r) {
  const CellResult& cell = r.cells.at(0);
  BoundParams p;
  p.d = 8;
  p.T = 1024;
  const double b = bounds::thm2_lower(p);
  return {cell.replications == 500 && cell.error.low >= b,
          "CI low " + fmt(cell.error.low) + " >= " + fmt(b) + " (mean " + fmt(cell.error.mean) + ", " +
              std::to_string(cell.replications) + " replications)"};
}

Outcome regret_gap(const ExperimentResult& r) {
  const CellResult& cell = r.cells.at(0);
  const bool ok = cell.jensen_violations == 0 && cell.replications == 500 && cell.regret.low > cell.error.high;
  return {ok, std::to_string(cell.jensen_violations) + " Jensen violations in " + std::to_string(cell.replications) +
                  " replications; mean regret " + fmt(cell.regret.mean) + " (CI low " + fmt(cell.regret.low) +
                  ") vs mean error " + fmt(cell.error.mean) + " (CI high " + fmt(cell.error.high) + ")"};
}

Outcome lemma6() {
  const auto t0 = Clock::now();
  const Lemma6Report rep = verify_lemma6(split_seed(kSeed, 3));
  const double secs = seconds_since(t0);
  std::string d;
  for (const auto& c : rep.checks) d += std::string(c.passed ? "ok " : "FAILED ") + c.name + "; ";
  return {rep.passed() && secs < 10.0, d + fmt(secs) + " s (limit 10 s)"};
}

Outcome kl() {
  const CheckResult r = check_kl(split_seed(kSeed, 4));
  return {r.passed, r.detail};
}

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "dfolab_acceptance";
  fs::create_directories(dir);
  const fs::path cfg = dir / "determinism.toml";
  std::ofstream(cfg) << kRandomQuadratic << "instance.d = 6\nbase_seed = 8\nsolver.T = 2048\nsolver.noise = \"lower_bound\"\n";
  const fs::path a = dir / "jobs1.csv", b = dir / "jobs8.csv";
  const std::string bin = DFOLAB_CLI_PATH;
  const int ra = shell(bin + " run " + cfg.string() + " --jobs 1 --out " + a.string());
  const int rb = shell(bin + " run " + cfg.string() + " --jobs 8 --out " + b.string());
  const std::string sa = slurp(a), sb = slurp(b);
  const bool ok = ra == 0 && rb == 0 && !sa.empty() && sa == sb;
  return {ok, "exit codes " + std::to_string(ra) + "/" + std::to_string(rb) + ", " + std::to_string(sa.size()) +
                  " bytes, files " + (sa == sb ? "identical" : "differ")};
}

Outcome verify_command() {
  const auto t0 = Clock::now();
  const int rc = shell(std::string(DFOLAB_CLI_PATH) + " verify > /dev/null");
  const double secs = seconds_since(t0);
  return {rc == 0 && secs < 60.0, "exit " + std::to_string(rc) + " in " + fmt(secs) + " s (limit 60 s)"};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int n, const std::string& name, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << n << " " << name << ": " << o.detail << std::endl;
  };

  report(1, "estimator unbiasedness", unbiasedness);
  report(2, "moment bounds", moments);
  report(3, "upper-bound consistency", thm1_consistency);
  report(4, "T-rate", t_rate);
  report(5, "d-rate (quadratic)", d_rate_quadratic);
  report(6, "d-rate (ridge)", d_rate_ridge);
  ExperimentResult hard;
  std::string hard_error;
  try {
    hard = hard_quadratic_run();
  } catch (const std::exception& e) {
    hard_error = e.what();
  }
  auto with_hard = [&](Outcome (*f)(const ExperimentResult&)) {
    return [&, f]() -> Outcome {
      if (!hard_error.empty()) return {false, "exception: " + hard_error};
      return f(hard);
    };
  };
  report(7, "lower-bound consistency", with_hard(lower_bound));
  report(8, "regret vs error gap", with_hard(regret_gap));
  report(9, "smooth-family property suite", lemma6);
  report(10, "Gaussian KL", kl);
  report(11, "determinism across --jobs", determinism);
  report(12, "verify subcommand", verify_command);

  std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED") << std::endl;
  return failed == 0 ? 0 : 1;
}
