#pragma once

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dfolab/config.hpp"
#include "dfolab/experiment.hpp"
#include "dfolab/results_io.hpp"
#include "dfolab/verify.hpp"

namespace dfolab {

inline constexpr std::uint64_t kDefaultVerifySeed = 20240601;

// Exit codes: 0 ok, 1 failed verification, 2 bad arguments/config/input, 3 other errors.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Zeroth-order stochastic convex optimization experiments", "dfolab"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format = "csv";
  unsigned jobs = default_jobs();
  bool retain_reps = false;
  bool timing = false;
  app.add_option("--seed", seed, "Base seed (overrides base_seed in the config)");
  app.add_option("--out", out_path, "Write results to this file instead of stdout");
  app.add_option("--format", format, "Result format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--jobs", jobs, "Worker threads for replications (default: DFOLAB_JOBS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--retain-reps", retain_reps, "Keep per-replication errors (JSON output)");
  app.add_flag("--timing", timing, "Record wall_time_ms (otherwise written as 0)");

  auto* verify = app.add_subcommand("verify", "Run the estimator, smooth-family and KL property checks");
  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("config", config_path, "Config file")->required();
  auto* sweep = app.add_subcommand("sweep", "Run a sweep and fit the log-log rate");
  sweep->add_option("config", config_path, "Config file")->required();
  std::string csv_path;
  auto* rates = app.add_subcommand("rates", "Re-fit the rate from a results CSV");
  rates->add_option("results", csv_path, "Results CSV")->required();
  for (auto* sub : {verify, run, sweep, rates}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  auto print_fit = [&](const SweepOutcome& s) {
    for (const auto& cell : s.result.cells)
      out << to_string(s.axis) << '=' << (s.axis == SweepAxis::T ? cell.T : cell.d)
          << " mean_error=" << io_detail::num(cell.error.mean) << '\n';
    for (const auto& note : s.excluded) out << "note: " << note << '\n';
    out << "slope=" << io_detail::num(s.fit.slope) << " target=" << io_detail::num(s.target)
        << " axis=" << to_string(s.axis) << " r_squared=" << io_detail::num(s.fit.r_squared) << '\n';
  };
  const OutputFormat fmt = *parse_output_format(format);
  auto emit = [&](const ExperimentResult& r, bool to_stdout) {
    if (!out_path.empty()) write_results(r, out_path, fmt);
    else if (to_stdout) out << render(r, fmt);
    for (const auto& cell : r.cells)
      if (cell.failed > 0)
        err << "warning: cell d=" << cell.d << " T=" << cell.T << " had " << cell.failed
            << " failed replications\n";
  };

  try {
    if (*verify) {
      const auto checks = run_verification_suite(seed.value_or(kDefaultVerifySeed));
      int failed = 0;
      for (const auto& c : checks) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        if (!c.passed) ++failed;
      }
      if (failed > 0) {
        err << failed << " check(s) failed:";
        for (const auto& c : checks)
          if (!c.passed) err << ' ' << c.name;
        err << '\n';
        return 1;
      }
      return 0;
    }
    RunOptions opt;
    opt.jobs = jobs;
    opt.record_timing = timing;
    opt.retain_reps = retain_reps;
    if (*rates) {
      print_fit(refit_rows(read_results_csv(csv_path)));
      return 0;
    }
    ExperimentConfig cfg = load_config(config_path);
    if (seed) cfg.base_seed = *seed;
    if (*run) {
      emit(run_experiment(cfg, opt), true);
      return 0;
    }
    const SweepOutcome s = sweep_and_fit(cfg, opt);
    emit(s.result, false);
    print_fit(s);
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace dfolab
