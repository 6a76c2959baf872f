#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out_file = dir / "stdout.txt";
  const fs::path err_file = dir / "stderr.txt";
  const std::string command = std::string(PENLAB_CLI_PATH) + " " + args + " > " +
                              out_file.string() + " 2> " + err_file.string();
  const int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_file);
  result.err = slurp(err_file);
  return result;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::path("cli_tmp") / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_toy_csv(const fs::path& path) {
  std::ofstream out(path);
  out << "x1,x2,x3,y\n";
  // y tracks x1; x2 is a scaled shadow, x3 is noise
  unsigned long state = 12345;
  const auto next = [&state]() {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return static_cast<double>((state >> 16) % 10000) / 10000.0 - 0.5;
  };
  for (int i = 0; i < 48; ++i) {
    const double x1 = next();
    const double x2 = 20.0 * next();
    const double x3 = next();
    const double y = 3.0 * x1 + 0.01 * next();
    out << x1 << ',' << x2 << ',' << x3 << ',' << y << '\n';
  }
}

}  // namespace

TEST_CASE("simulate writes records, aggregate, markdown and manifest") {
  TempDir dir("simulate");
  const fs::path out = dir.path / "r.csv";
  const CliResult result = run_cli(
      "simulate --scenario IND --n 60 --methods lasso.min --modes both --replicates 2 --seed 7 "
      "--out " + out.string(),
      dir.path);
  CHECK(result.exit_code == 0);
  REQUIRE(fs::exists(out));
  CHECK(fs::exists(dir.path / "r.agg.csv"));
  CHECK(fs::exists(dir.path / "r.md"));
  CHECK(fs::exists(dir.path / "r.manifest.json"));

  // 2 replicates x 1 method x 2 modes = 4 records plus a header line
  const std::string text = slurp(out);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("simulate replays byte-identically from its manifest") {
  TempDir dir("replay");
  const fs::path first = dir.path / "a.csv";
  const CliResult run1 = run_cli(
      "simulate --scenario UTOEP-S --n 50 --rho 0.5 --methods lasso.min,lasso.1se --modes univ "
      "--replicates 2 --seed 3 --out " + first.string(),
      dir.path);
  REQUIRE(run1.exit_code == 0);

  const fs::path second = dir.path / "b.csv";
  const CliResult run2 = run_cli("simulate --from-manifest " + (dir.path / "a.manifest.json").string() +
                                     " --out " + second.string(),
                                 dir.path);
  REQUIRE(run2.exit_code == 0);
  CHECK(slurp(first) == slurp(second));
  CHECK(slurp(dir.path / "a.agg.csv") == slurp(dir.path / "b.agg.csv"));
}

TEST_CASE("simulate is thread-count invariant") {
  TempDir dir("threads");
  const fs::path one = dir.path / "t1.csv";
  const fs::path eight = dir.path / "t8.csv";
  REQUIRE(run_cli("simulate --scenario IND --n 60 --methods lasso.min,lasso.bic --modes both "
                  "--replicates 3 --seed 5 --threads 1 --out " + one.string(),
                  dir.path)
              .exit_code == 0);
  REQUIRE(run_cli("simulate --scenario IND --n 60 --methods lasso.min,lasso.bic --modes both "
                  "--replicates 3 --seed 5 --threads 8 --out " + eight.string(),
                  dir.path)
              .exit_code == 0);
  CHECK(slurp(one) == slurp(eight));
}

TEST_CASE("unknown scenario names the valid options and exits 2") {
  TempDir dir("badscenario");
  const CliResult result = run_cli(
      "simulate --scenario NOPE --n 50 --methods lasso.min --modes raw --replicates 1 --out " +
          (dir.path / "x.csv").string(),
      dir.path);
  CHECK(result.exit_code == 2);
  CHECK(result.err.find("IND") != std::string::npos);
  CHECK(result.err.find("RNC.TOEP-S") != std::string::npos);
}

TEST_CASE("fit reports the generating covariate on toy data") {
  TempDir dir("fit");
  const fs::path csv = dir.path / "toy.csv";
  write_toy_csv(csv);
  const CliResult result = run_cli(
      "fit --data " + csv.string() + " --response y --method lasso --rule min --mode univ",
      dir.path);
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("\"x1\"") != std::string::npos);
  CHECK(result.out.find("coefficients") != std::string::npos);
}

TEST_CASE("fit rejects unsupported method-rule combinations") {
  TempDir dir("badrule");
  const fs::path csv = dir.path / "toy.csv";
  write_toy_csv(csv);
  const CliResult result = run_cli(
      "fit --data " + csv.string() + " --response y --method dant --rule bic", dir.path);
  CHECK(result.exit_code == 2);
}

TEST_CASE("raw and univariate modes can disagree on scale-skewed data") {
  TempDir dir("modes");
  const fs::path csv = dir.path / "toy.csv";
  write_toy_csv(csv);
  const CliResult raw = run_cli(
      "fit --data " + csv.string() + " --response y --method lasso --rule 1se --mode raw",
      dir.path);
  const CliResult univ = run_cli(
      "fit --data " + csv.string() + " --response y --method lasso --rule 1se --mode univ",
      dir.path);
  CHECK(raw.exit_code == 0);
  CHECK(univ.exit_code == 0);
  // both runs emit a support; the demonstration data keeps x1 in play
  CHECK(univ.out.find("\"x1\"") != std::string::npos);
}

TEST_CASE("screen ranks the generating covariate first") {
  TempDir dir("screen");
  const fs::path csv = dir.path / "toy.csv";
  write_toy_csv(csv);
  const CliResult result = run_cli(
      "screen --data " + csv.string() + " --response y --method r2", dir.path);
  CHECK(result.exit_code == 0);
  const std::size_t header_end = result.out.find('\n');
  const std::string first_row = result.out.substr(header_end + 1, 20);
  CHECK(first_row.find("1,x1,") == 0);
}

TEST_CASE("pipeline completes on a toy dataset and logs the trim count") {
  TempDir dir("pipeline");
  const fs::path csv = dir.path / "toy.csv";
  write_toy_csv(csv);
  const fs::path config = dir.path / "config.json";
  {
    std::ofstream out(config);
    out << R"({"repetitions":2,"methods":["lasso.min"],"apply_boxcox":false,)"
        << R"("trim_fraction":0.05,"base_seed":4})";
  }
  const fs::path out = dir.path / "results.csv";
  const CliResult result = run_cli("pipeline --data " + csv.string() +
                                       " --response y --config " + config.string() + " --out " +
                                       out.string(),
                                   dir.path);
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("2 trimmed as outliers") != std::string::npos);  // floor(0.05 * 48)
  CHECK(fs::exists(out));
  CHECK(fs::exists(dir.path / "results.provenance.json"));
  CHECK(fs::exists(dir.path / "results.manifest.json"));
  const std::string rows = slurp(out);
  CHECK(rows.find("lasso.min") != std::string::npos);
}
