#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include <gtest/gtest.h>

#include "dfolab/cli.hpp"
#include "dfolab/config.hpp"
#include "dfolab/experiment.hpp"
#include "dfolab/results_io.hpp"

using namespace dfolab;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(
algorithm = "alg1"      # trailing comment
replications = 12
base_seed = 5
instance.family = "quadratic.random"
instance.d = 3
instance.lambda = 0.5
domain.kind = "rd"
domain.B = 1.0
domain.epsilon = 1.0
solver.T = 64
)";

fs::path temp_dir() {
  const fs::path p = fs::temp_directory_path() / ("dfolab_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::create_directories(p);
  return p;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = temp_dir() / name;
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "dfolab");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = run_cli(int(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

}  // namespace

// --- config -------------------------------------------------------------------

TEST(Config, ParsesAllKinds) {
  const ExperimentConfig c = parse_config_string(std::string(kSmall) + "sweep.T = [16, 32, 64]\n");
  EXPECT_EQ(c.algorithm, Algorithm::alg1);
  EXPECT_EQ(c.replications, 12);
  EXPECT_EQ(c.base_seed, 5U);
  EXPECT_EQ(c.instance.d, 3);
  EXPECT_EQ(c.instance_lambda(), 0.5);
  EXPECT_EQ(c.step_lambda(), 0.5);
  EXPECT_EQ(c.noise_kind(), NoiseKind::standard);
  EXPECT_EQ(c.sweep_T, (std::vector<long>{16, 32, 64}));
}

TEST(Config, FamilyDefaults) {
  const auto hard = parse_config_string("instance.family = \"quadratic.hard\"\n");
  EXPECT_EQ(hard.noise_kind(), NoiseKind::lower_bound);
  EXPECT_EQ(hard.step_lambda(), 1.0);
  const auto smooth = parse_config_string("instance.family = \"smooth.hard\"\n");
  EXPECT_EQ(smooth.noise_kind(), NoiseKind::unit);
  EXPECT_EQ(smooth.step_lambda(), 0.5);
  const auto ridge = parse_config_string("algorithm = \"alg2\"\ninstance.family = \"ridge.stream\"\n");
  EXPECT_EQ(ridge.noise_kind(), NoiseKind::none);
}

TEST(Config, Rejections) {
  const std::vector<std::string> bad{
      "instance.dd = 3\n",
      "algorithm = alg3\n",
      "solver.T = 63\n",
      "solver.T = 1.5\n",
      "replications = 0\n",
      "sweep.T = [64, 32, 128]\n",
      "sweep.T = [16, 32, 64]\nsweep.d = [1, 2, 3]\n",
      "solver.epsilon = 0.5\ndomain.epsilon = 0.25\n",
      "algorithm = \"alg2\"\n",
      "instance.family = \"quadratic.hard\"\ninstance.lambda = 0.5\n",
      "instance.mu-override = 0.1\n",
      "solver.noise = \"loud\"\n",
      "domain.bounds = [1, -1]\ndomain.kind = \"box\"\n",
      "no equals sign\n",
      "base_seed = 1\nbase_seed = 2\n",
      "instance.lambda = 2.0\n",
  };
  for (const auto& text : bad) EXPECT_THROW(parse_config_string(text), ConfigError) << text;
}

TEST(Config, EpsilonFromEitherKey) {
  EXPECT_EQ(parse_config_string("solver.epsilon = 0.5\n").domain.epsilon, 0.5);
  EXPECT_EQ(parse_config_string("domain.epsilon = 0.25\nsolver.epsilon = 0.25\n").domain.epsilon, 0.25);
}

TEST(Config, HashTracksEffectiveSettings) {
  const auto a = parse_config_string(kSmall);
  auto b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.base_seed = 6;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, ShippedConfigsParse) {
  for (const auto& entry : fs::directory_iterator(DFOLAB_SOURCE_DIR "/configs"))
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
}

// --- seeds --------------------------------------------------------------------

TEST(Seeds, MillionDistinctReplicationSeeds) {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(2000000);
  for (std::uint64_t k = 0; k < 1000000; ++k) ASSERT_TRUE(seen.insert(split_seed(12345, k)).second) << k;
}

// --- experiments --------------------------------------------------------------

TEST(Experiment, SingleDeterministicReplicationHasZeroWidth) {
  ExperimentConfig c = parse_config_string(kSmall);
  c.replications = 1;
  c.noise = NoiseKind::none;
  c.instance.seed = 77;
  const ExperimentResult r = run_experiment(c);
  ASSERT_EQ(r.cells.size(), 1U);
  const CellResult& cell = r.cells[0];
  EXPECT_EQ(cell.error.low, cell.error.high);
  EXPECT_EQ(cell.error.mean, cell.error.low);

  // Rebuild the same run by hand.
  Rng inst(77);
  const auto wd = build_working_domain(Domain::whole(), 1.0, 1.0, DomainMode::exterior_query);
  const QuadraticInstance q = draw_random_quadratic(c, 3, wd, inst);
  SolverConfig sc;
  sc.T = 64;
  sc.lambda = 0.5;
  sc.noise = NoiseModel{NoiseKind::none};
  sc.seed = split_seed(split_seed(5, 0), 1);
  const RunRecord rec = run_algorithm1(q, wd, sc);
  EXPECT_EQ(cell.error.mean, optimization_error(q, rec.returned_point));
}

TEST(Experiment, DoublingReplicationsShrinksInterval) {
  ExperimentConfig c = parse_config_string(kSmall);
  c.replications = 400;
  const double w1 = [&] {
    const auto r = run_experiment(c);
    return r.cells[0].error.high - r.cells[0].error.low;
  }();
  c.replications = 800;
  const auto r2 = run_experiment(c);
  const double w2 = r2.cells[0].error.high - r2.cells[0].error.low;
  EXPECT_NEAR(w1 / w2, std::sqrt(2.0), 0.2 * std::sqrt(2.0));
}

TEST(Experiment, RetainedRepsReproduceMeans) {
  ExperimentConfig c = parse_config_string(std::string(kSmall) + "sweep.d = [1, 2, 4]\n");
  RunOptions opt;
  opt.retain_reps = true;
  opt.jobs = 3;
  const auto r = run_experiment(c, opt);
  ASSERT_EQ(r.cells.size(), 3U);
  for (const auto& cell : r.cells) {
    ASSERT_EQ(cell.rep_errors.size(), 12U);
    double s = 0.0, t = 0.0;
    for (double e : cell.rep_errors) s += e;
    for (double e : cell.rep_regrets) t += e;
    EXPECT_NEAR(s / 12.0, cell.error.mean, 1e-12);
    EXPECT_NEAR(t / 12.0, cell.regret.mean, 1e-12);
    EXPECT_GE(cell.error.mean, 0.0);
    EXPECT_LE(cell.error.low, cell.error.mean);
    EXPECT_GE(cell.error.high, cell.error.mean);
    EXPECT_EQ(cell.jensen_violations, 0);
  }
}

TEST(Experiment, IndependentOfJobCount) {
  for (const char* family : {"quadratic.random", "quadratic.hard", "smooth.hard"}) {
    ExperimentConfig c = parse_config_string(std::string("instance.family = \"") + family + "\"\nreplications = 9\nsolver.T = 128\n");
    RunOptions one, many;
    many.jobs = 4;
    EXPECT_EQ(to_csv(run_experiment(c, one)), to_csv(run_experiment(c, many))) << family;
  }
  ExperimentConfig r = parse_config_string("algorithm = \"alg2\"\ninstance.family = \"ridge.stream\"\nreplications = 9\n");
  RunOptions many;
  many.jobs = 5;
  EXPECT_EQ(to_csv(run_experiment(r)), to_csv(run_experiment(r, many)));
}

TEST(Experiment, MinimizerOutsideDomainIsConfigError) {
  ExperimentConfig c = parse_config_string(
      "instance.family = \"smooth.hard\"\ninstance.d = 4\ninstance.mu-override = 2.0\nreplications = 2\n");
  EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(Experiment, RandomQuadraticScaledIntoSmallDomain) {
  ExperimentConfig c = parse_config_string(
      "instance.lambda = 0.1\ninstance.b_norm = 1.0\ndomain.B = 0.3\nreplications = 4\nsolver.T = 64\n");
  const auto r = run_experiment(c);
  EXPECT_EQ(r.cells[0].replications, 4);
  EXPECT_GE(r.cells[0].error.mean, 0.0);
}

TEST(Sweep, FitExcludesUnusableCells) {
  ExperimentResult r;
  for (long T : {100L, 200L, 400L, 800L}) {
    CellResult c;
    c.T = T;
    c.d = 3;
    c.replications = 10;
    c.error.mean = 5.0 / double(T);
    r.cells.push_back(c);
  }
  r.cells[1].error.mean = std::numeric_limits<double>::quiet_NaN();
  r.cells[1].replications = 0;
  r.cells[1].failed = 10;
  const SweepOutcome s = fit_cells(r, SweepAxis::T, -1.0);
  EXPECT_NEAR(s.fit.slope, -1.0, 1e-12);
  ASSERT_EQ(s.excluded.size(), 1U);
  r.cells[2].error.mean = 0.0;
  EXPECT_THROW(fit_cells(r, SweepAxis::T, -1.0), ConfigError);
}

TEST(Sweep, NeedsThreeValues) {
  ExperimentConfig c = parse_config_string(std::string(kSmall) + "sweep.T = [16, 32]\n");
  EXPECT_THROW(sweep_and_fit(c), ConfigError);
}

TEST(Sweep, TargetExponents) {
  EXPECT_EQ(target_exponent(Algorithm::alg1, Family::quadratic_random, SweepAxis::T), -1.0);
  EXPECT_EQ(target_exponent(Algorithm::alg1, Family::quadratic_random, SweepAxis::d), 2.0);
  EXPECT_EQ(target_exponent(Algorithm::alg2, Family::ridge_stream, SweepAxis::d), 1.0);
  EXPECT_EQ(target_exponent(Algorithm::alg1, Family::smooth_hard, SweepAxis::T), -0.5);
}

// --- results I/O --------------------------------------------------------------

TEST(ResultsIo, EmptyResultIsHeaderOnly) {
  EXPECT_EQ(to_csv(ExperimentResult{}), std::string(kCsvHeader) + "\n");
}

TEST(ResultsIo, CsvRoundTrip) {
  ExperimentConfig c = parse_config_string(std::string(kSmall) + "sweep.T = [16, 32, 64]\n");
  RunOptions opt;
  opt.record_timing = true;
  const ExperimentResult r = run_experiment(c, opt);
  const auto rows = result_rows(r);
  const fs::path p = temp_dir() / "round.csv";
  write_results(r, p.string(), OutputFormat::csv);
  const auto back = read_results_csv(p.string());
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].run_id, rows[i].run_id);
    EXPECT_EQ(back[i].family, rows[i].family);
    EXPECT_EQ(back[i].d, rows[i].d);
    EXPECT_EQ(back[i].T, rows[i].T);
    EXPECT_EQ(back[i].lambda, rows[i].lambda);
    EXPECT_EQ(back[i].epsilon, rows[i].epsilon);
    EXPECT_EQ(back[i].replications, rows[i].replications);
    EXPECT_EQ(back[i].seed, rows[i].seed);
    EXPECT_EQ(back[i].mean_error, rows[i].mean_error);
    EXPECT_EQ(back[i].error_ci_low, rows[i].error_ci_low);
    EXPECT_EQ(back[i].error_ci_high, rows[i].error_ci_high);
    EXPECT_EQ(back[i].mean_regret, rows[i].mean_regret);
    EXPECT_EQ(back[i].regret_ci_low, rows[i].regret_ci_low);
    EXPECT_EQ(back[i].regret_ci_high, rows[i].regret_ci_high);
    EXPECT_EQ(back[i].wall_time_ms, rows[i].wall_time_ms);
  }
  EXPECT_EQ(to_csv(back), slurp(p));
}

TEST(ResultsIo, SameConfigSameBytes) {
  ExperimentConfig c = parse_config_string(kSmall);
  const fs::path a = temp_dir() / "a.csv", b = temp_dir() / "b.csv";
  write_results(run_experiment(c), a.string(), OutputFormat::csv);
  write_results(run_experiment(c), b.string(), OutputFormat::csv);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(ResultsIo, SeventeenSignificantDigits) {
  ExperimentResult r;
  CellResult c;
  c.error.mean = 0.1;
  r.cells.push_back(c);
  EXPECT_NE(to_csv(r).find(",0.10000000000000001,"), std::string::npos);
}

TEST(ResultsIo, JsonMirrorsCsv) {
  ExperimentConfig c = parse_config_string(kSmall);
  RunOptions opt;
  opt.retain_reps = true;
  const ExperimentResult r = run_experiment(c, opt);
  const auto j = nlohmann::json::parse(to_json(r));
  EXPECT_EQ(j["provenance"]["version"], kArtifactVersion);
  EXPECT_EQ(j["provenance"]["seed"], 5);
  ASSERT_EQ(j["cells"].size(), 1U);
  const auto& cell = j["cells"][0];
  for (const char* key : {"run_id", "algorithm", "family", "d", "T", "lambda", "epsilon", "noise", "replications",
                          "seed", "mean_error", "error_ci_low", "error_ci_high", "mean_regret", "regret_ci_low",
                          "regret_ci_high", "wall_time_ms"})
    EXPECT_TRUE(cell.contains(key)) << key;
  EXPECT_EQ(cell["mean_error"].get<double>(), r.cells[0].error.mean);
  EXPECT_EQ(cell["replication_errors"].size(), 12U);
}

TEST(ResultsIo, UnwritablePathNamed) {
  try {
    write_results(ExperimentResult{}, "/nonexistent-dir/x.csv", OutputFormat::csv);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.csv"), std::string::npos);
  }
}

TEST(ResultsIo, RejectsMalformedCsv) {
  std::istringstream wrong_header("a,b,c\n");
  EXPECT_THROW(parse_results_csv(wrong_header), ConfigError);
  std::istringstream short_row(std::string(kCsvHeader) + "\nx,alg1\n");
  EXPECT_THROW(parse_results_csv(short_row), ConfigError);
}

// --- CLI ------------------------------------------------------------------------

TEST(Cli, UnknownSubcommandExits2) {
  EXPECT_EQ(cli({"frobnicate"}), 2);
  EXPECT_EQ(cli({}), 2);
}

TEST(Cli, BadConfigExits2) {
  std::string err;
  EXPECT_EQ(cli({"run", write_file("bad.toml", "instance.dimension = 3\n").string()}, nullptr, &err), 2);
  EXPECT_NE(err.find("unknown key"), std::string::npos);
  EXPECT_EQ(cli({"run", (temp_dir() / "missing.toml").string()}), 2);
}

TEST(Cli, VerifyPasses) {
  std::string out;
  EXPECT_EQ(cli({"verify"}, &out), 0);
  EXPECT_EQ(out.find("FAIL"), std::string::npos);
}

TEST(Cli, RunWritesCsvAndRatesRefits) {
  const fs::path cfg = write_file("sweep.toml", std::string(kSmall) + "sweep.T = [64, 128, 256]\n");
  const fs::path csv = temp_dir() / "sweep.csv";
  std::string out;
  ASSERT_EQ(cli({"sweep", cfg.string(), "--out", csv.string()}, &out), 0);
  EXPECT_NE(out.find("slope="), std::string::npos);
  EXPECT_NE(out.find("target=-1"), std::string::npos);
  std::string again;
  ASSERT_EQ(cli({"rates", csv.string()}, &again), 0);
  EXPECT_EQ(out.substr(out.find("slope=")), again.substr(again.find("slope=")));

  ASSERT_EQ(cli({"run", cfg.string(), "--format", "json", "--seed", "9"}, &out), 0);
  EXPECT_EQ(nlohmann::json::parse(out)["provenance"]["seed"], 9);
}

TEST(Cli, RatesNeedsOneVaryingAxis) {
  const fs::path cfg = write_file("single.toml", kSmall);
  const fs::path csv = temp_dir() / "single.csv";
  ASSERT_EQ(cli({"run", cfg.string(), "--out", csv.string()}), 0);
  EXPECT_EQ(cli({"rates", csv.string()}), 2);
}

TEST(Cli, BinaryExitCodes) {
  const std::string bin = DFOLAB_CLI_PATH;
  EXPECT_EQ(std::system((bin + " verify > /dev/null").c_str()), 0);
  const int rc = std::system((bin + " nonsense > /dev/null 2>&1").c_str());
  EXPECT_EQ(WEXITSTATUS(rc), 2);
}
