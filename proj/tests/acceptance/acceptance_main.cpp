// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// hard criterion fails. Criterion 9 needs a user-supplied dataset and is
// skipped (not failed) when PENLAB_BODYFAT_CSV is unset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "penlab/bench.hpp"
#include "penlab/dantzig.hpp"
#include "penlab/model_selection.hpp"
#include "penlab/pipeline.hpp"
#include "penlab/scenarios.hpp"
#include "penlab/screening.hpp"
#include "penlab/solvers.hpp"
#include "../oracles.hpp"
#include "../test_helpers.hpp"

using namespace penlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = true;
  bool skipped = false;
  std::string detail;
};

std::string fmt(double value, int digits = 4) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
  return buffer;
}

bool within(double value, double target, double tolerance) {
  return std::abs(value - target) <= tolerance;
}

// ---------------------------------------------------------------- criterion 1
Outcome oracle_calibration() {
  Outcome outcome;
  const auto sigma_sq = [](Scenario name, double rho) {
    const ScenarioTruth truth = scenario_truth({name, 300, rho});
    return truth.sigma_eps * truth.sigma_eps;
  };
  struct Check {
    Scenario name;
    double rho;
    double target;
  };
  const std::vector<Check> checks = {
      {Scenario::kInd, 0.0, 1.736},      {Scenario::kRcInd, 0.0, 13.715},
      {Scenario::kRncInd, 0.0, 13.715},  {Scenario::kUtoepS, 0.9, 1.244},
      {Scenario::kRcToepS, 0.9, 7.818},  {Scenario::kRncToepS, 0.9, 7.818},
  };
  std::ostringstream detail;
  for (const Check& check : checks) {
    const double value = sigma_sq(check.name, check.rho);
    const bool ok = within(value, check.target, 0.001);
    outcome.passed = outcome.passed && ok;
    detail << scenario_id(check.name) << "=" << fmt(value) << (ok ? " " : "(!) ");
  }
  const double block = sigma_sq(Scenario::kUtoepB, 0.9);
  const bool block_ok = std::abs(block - 3.807) / 3.807 <= 0.05;
  outcome.passed = outcome.passed && block_ok;
  detail << "UTOEP-B=" << fmt(block) << " vs 3.807 (flagged, 5% band"
         << (block_ok ? " ok)" : " VIOLATED)");
  outcome.detail = detail.str();
  return outcome;
}

// ---------------------------------------------------------------- criterion 2
Outcome orthogonal_equivalence() {
  Outcome outcome;
  double worst = 0.0;
  SolverControl control;
  control.tol = 1e-10;
  for (int design = 0; design < 20; ++design) {
    RngStream rng(8800 + design, 0);
    Eigen::VectorXd sds(50);
    for (int j = 0; j < 50; ++j) sds[j] = 0.25 + 2.0 * rng.next_double();
    const Eigen::MatrixXd x = testing::orthogonal_design(200, 50, sds, rng);
    Eigen::VectorXd beta_true = Eigen::VectorXd::Zero(50);
    for (int j = 0; j < 10; ++j) beta_true[j] = (j % 2 == 0 ? 1.0 : -1.0);
    const Eigen::VectorXd y = x * beta_true + testing::random_vector(200, rng);
    const double lambda_max = (x.transpose() * y).lpNorm<Eigen::Infinity>() / 200.0;
    for (int l = 0; l < 20; ++l) {
      const double lambda = lambda_max * std::pow(1e-3, l / 19.0);
      const Eigen::VectorXd closed = orthogonal_closed_form(x, y, lambda);
      const FitResult cd = lasso_cd(x, y, PenaltySpec::lasso(lambda), control);
      worst = std::max(worst, (closed - cd.beta).cwiseAbs().maxCoeff());
    }
  }
  outcome.passed = worst <= 1e-6;
  outcome.detail = "max |closed-form - coordinate-descent| = " + fmt(worst, 10) +
                   " over 20 designs x 20 penalties";
  return outcome;
}

// ---------------------------------------------------------------- criterion 3
Outcome ind_replication() {
  Outcome outcome;
  std::ostringstream detail;

  RunConfig ind;
  ind.spec = {Scenario::kInd, 300};
  ind.methods = {Method::kLassoMin, Method::kLassoBic};
  ind.modes = {StandardizationMode::kRaw};
  ind.replicates = 50;
  ind.base_seed = 20260808;
  const double ind_sigma_sq = 1.7361111111111112;
  const std::vector<AggregateRow> ind_rows =
      aggregate(run_monte_carlo(ind), std::sqrt(ind_sigma_sq));

  for (const AggregateRow& row : ind_rows) {
    if (row.method == Method::kLassoMin) {
      const bool tp_ok = row.mean_tp >= 9.9;
      const bool dev_ok = within(row.mean_pct_dev, 0.922, 0.01);
      outcome.passed = outcome.passed && tp_ok && dev_ok;
      detail << "lasso.min TP=" << fmt(row.mean_tp, 2) << (tp_ok ? "" : "(!)")
             << " %Dev=" << fmt(row.mean_pct_dev, 4) << (dev_ok ? "" : "(!)");
    } else {
      const bool gi = row.mean_mse >= 0.9 * ind_sigma_sq && row.mean_mse <= 1.1 * ind_sigma_sq;
      outcome.passed = outcome.passed && gi;
      detail << " | lasso.bic MSE=" << fmt(row.mean_mse, 3) << (gi ? " in GI" : " OUT OF GI");
    }
  }

  RunConfig rc;
  rc.spec = {Scenario::kRcInd, 300};
  rc.methods = {Method::kLasso1se};
  rc.modes = {StandardizationMode::kRaw};
  rc.replicates = 50;
  rc.base_seed = 20260809;
  const double rc_sigma_sq = 13.71527777777778;
  const std::vector<AggregateRow> rc_rows =
      aggregate(run_monte_carlo(rc), std::sqrt(rc_sigma_sq));
  const bool rc_gi =
      rc_rows[0].mean_mse >= 0.9 * rc_sigma_sq && rc_rows[0].mean_mse <= 1.1 * rc_sigma_sq;
  outcome.passed = outcome.passed && rc_gi;
  detail << " | RC.IND lasso.1se(raw) MSE=" << fmt(rc_rows[0].mean_mse, 3)
         << (rc_gi ? " in GI" : " OUT OF GI");

  outcome.detail = detail.str();
  return outcome;
}

// ---------------------------------------------------------------- criterion 4
Outcome toeps_replication() {
  Outcome outcome;
  RunConfig config;
  config.spec = {Scenario::kRcToepS, 300, 0.9};
  config.methods = {Method::kAdapl1se, Method::kDantzig, Method::kLasso1se, Method::kLassoBic};
  config.modes = {StandardizationMode::kRaw, StandardizationMode::kUnivariate};
  config.replicates = 50;
  config.base_seed = 20260810;
  const double sigma_sq = 7.818152169528879;
  const std::vector<AggregateRow> rows =
      aggregate(run_monte_carlo(config), std::sqrt(sigma_sq));

  struct Expectation {
    Method method;
    StandardizationMode mode;
    double table_value;
    bool wants_over;  // otherwise wants GI
  };
  const std::vector<Expectation> expectations = {
      {Method::kAdapl1se, StandardizationMode::kRaw, 8.924, true},
      {Method::kAdapl1se, StandardizationMode::kUnivariate, 8.790, true},
      {Method::kDantzig, StandardizationMode::kRaw, 11.804, true},
      {Method::kDantzig, StandardizationMode::kUnivariate, 11.804, true},
      {Method::kLasso1se, StandardizationMode::kRaw, 7.561, false},
      {Method::kLasso1se, StandardizationMode::kUnivariate, 7.302, false},
      {Method::kLassoBic, StandardizationMode::kRaw, 7.643, false},
      {Method::kLassoBic, StandardizationMode::kUnivariate, 7.527, false},
  };

  std::ostringstream detail;
  for (const Expectation& expect : expectations) {
    const auto row = std::find_if(rows.begin(), rows.end(), [&](const AggregateRow& r) {
      return r.method == expect.method && r.mode == expect.mode;
    });
    if (row == rows.end()) {
      outcome.passed = false;
      detail << method_id(expect.method) << "/missing! ";
      continue;
    }
    const bool flag_ok = expect.wants_over ? row->over : row->gi;
    const bool value_ok =
        std::abs(row->mean_mse - expect.table_value) <= 0.10 * expect.table_value;
    outcome.passed = outcome.passed && flag_ok && value_ok;
    detail << method_id(expect.method) << "/" << to_string(expect.mode) << "="
           << fmt(row->mean_mse, 3) << (flag_ok ? "" : "(flag!)")
           << (value_ok ? "" : "(value!)") << " ";
  }
  outcome.detail = detail.str();
  return outcome;
}

// ---------------------------------------------------------------- criterion 5
Outcome dantzig_exactness() {
  Outcome outcome;
  double worst_gap = 0.0;
  double worst_residual = 0.0;
  int count = 0;
  for (int trial = 0; trial < 100; ++trial) {
    RngStream rng(9100 + trial, 0);
    const int p = 2 + trial % 7;  // sizes 2..8
    const int n = 10 + p;
    const Eigen::MatrixXd x = testing::random_matrix(n, p, rng);
    Eigen::VectorXd beta_true = Eigen::VectorXd::Zero(p);
    beta_true[0] = 1.5;
    if (p > 3) beta_true[3] = -1.0;
    const Eigen::VectorXd y = x * beta_true + 0.5 * testing::random_vector(n, rng);
    const Eigen::MatrixXd gram = x.transpose() * x / n;
    const Eigen::VectorXd xty = x.transpose() * y / n;
    const double lambda = (0.15 + 0.5 * rng.next_double()) * xty.cwiseAbs().maxCoeff();

    const DantzigSolution solution = dantzig_select(x, y, lambda);
    const double oracle = testing::dantzig_l1_oracle(gram, xty, lambda);
    worst_gap = std::max(worst_gap, std::abs(solution.objective - oracle));
    worst_residual = std::max(worst_residual, solution.feasibility_residual);
    ++count;
  }
  outcome.passed = worst_gap <= 1e-8 && worst_residual <= 1e-8;
  outcome.detail = "instances=" + std::to_string(count) +
                   " max |l1 - oracle|=" + fmt(worst_gap, 12) +
                   " max residual=" + fmt(worst_residual, 12);
  return outcome;
}

// ---------------------------------------------------------------- criterion 6
Outcome distance_correlation_suite() {
  Outcome outcome;
  std::ostringstream detail;

  RngStream rng(9300, 0);
  bool range_ok = true;
  for (int trial = 0; trial < 10000; ++trial) {
    const Eigen::VectorXd u = testing::random_vector(12, rng);
    const Eigen::VectorXd v = testing::random_vector(12, rng);
    const DcorStat stat = dcor(u, v);
    range_ok = range_ok && stat.dcor >= 0.0 && stat.dcor <= 1.0;
  }
  detail << "range(1e4 pairs) " << (range_ok ? "ok" : "VIOLATED");

  const Eigen::VectorXd x = testing::random_vector(60, rng);
  const bool self_ok = std::abs(dcor(x, x).dcor - 1.0) < 1e-12;
  detail << ", self=1 " << (self_ok ? "ok" : "VIOLATED");

  bool affine_ok = true;
  const Eigen::VectorXd partner = testing::random_vector(60, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = 2.0 * rng.next_gaussian();
    const double b = 0.1 + 5.0 * rng.next_double();
    const Eigen::VectorXd mapped = (a + b * x.array()).matrix();
    affine_ok =
        affine_ok && std::abs(dcor(mapped, partner).dcor - dcor(x, partner).dcor) <= 1e-10;
  }
  detail << ", affine " << (affine_ok ? "ok" : "VIOLATED");

  int rejections = 0;
  std::vector<double> p_values;
  const int seeds = 500;
  for (int seed = 0; seed < seeds; ++seed) {
    RngStream data_rng(9400 + seed, 0);
    const Eigen::VectorXd eps = testing::random_vector(100, data_rng);
    const Eigen::VectorXd xj = testing::random_vector(100, data_rng);
    RngStream test_rng(9400 + seed, 1);
    const double p = independence_test(eps, xj, 199, test_rng);
    p_values.push_back(p);
    rejections += (p <= 0.05);
  }
  const double size = static_cast<double>(rejections) / seeds;
  const bool size_ok = within(size, 0.05, 0.02);
  detail << ", size=" << fmt(size, 3) << (size_ok ? " ok" : " VIOLATED");

  // one-sided check that p-values are stochastically >= uniform
  std::sort(p_values.begin(), p_values.end());
  double d_plus = 0.0;
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    d_plus = std::max(d_plus, static_cast<double>(i + 1) / seeds - p_values[i]);
  }
  const bool ks_ok = d_plus <= 1.22 / std::sqrt(static_cast<double>(seeds));
  detail << ", KS+ = " << fmt(d_plus, 3) << (ks_ok ? " ok" : " VIOLATED");

  outcome.passed = range_ok && self_ok && affine_ok && size_ok && ks_ok;
  outcome.detail = detail.str();
  return outcome;
}

// ---------------------------------------------------------------- criterion 7
Outcome aggregate_ordering() {
  Outcome outcome;
  RunConfig config;
  config.spec = {Scenario::kUtoepS, 100, 0.5};
  config.methods = {Method::kLassoMin, Method::kLasso1se};
  config.modes = {StandardizationMode::kUnivariate};
  config.replicates = 50;
  config.base_seed = 20260811;
  const double sigma_eps = scenario_truth(config.spec).sigma_eps;
  const std::vector<AggregateRow> rows = aggregate(run_monte_carlo(config), sigma_eps);

  const auto find = [&](Method m) {
    return *std::find_if(rows.begin(), rows.end(),
                         [&](const AggregateRow& r) { return r.method == m; });
  };
  const AggregateRow min_row = find(Method::kLassoMin);
  const AggregateRow one_se_row = find(Method::kLasso1se);
  const bool support_ok = one_se_row.mean_support <= min_row.mean_support;
  const bool tp_ok = min_row.mean_tp >= one_se_row.mean_tp;
  outcome.passed = support_ok && tp_ok;
  outcome.detail = "mean|S|: min=" + fmt(min_row.mean_support, 2) +
                   " 1se=" + fmt(one_se_row.mean_support, 2) +
                   (support_ok ? " ok" : " VIOLATED") +
                   "; mean TP: min=" + fmt(min_row.mean_tp, 2) +
                   " 1se=" + fmt(one_se_row.mean_tp, 2) + (tp_ok ? " ok" : " VIOLATED");
  return outcome;
}

// ---------------------------------------------------------------- criterion 8
Outcome cli_determinism() {
  Outcome outcome;
  const fs::path dir = "acceptance_tmp";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const auto run = [&](const std::string& args) {
    const std::string command = std::string(PENLAB_CLI_PATH) + " " + args + " > " +
                                (dir / "out.txt").string() + " 2> " + (dir / "err.txt").string();
    return std::system(command.c_str());
  };
  const std::string base =
      "simulate --scenario RC.IND --n 80 --methods lasso.min,lasso.1se --modes both "
      "--replicates 4 --seed 99 --out ";
  const int status1 = run(base + (dir / "t1.csv").string() + " --threads 1");
  const int status8 = run(base + (dir / "t8.csv").string() + " --threads 8");

  const auto slurp = [](const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  };
  const std::string one = slurp(dir / "t1.csv");
  const std::string eight = slurp(dir / "t8.csv");
  outcome.passed = status1 == 0 && status8 == 0 && !one.empty() && one == eight &&
                   slurp(dir / "t1.agg.csv") == slurp(dir / "t8.agg.csv");
  outcome.detail = std::string("records ") +
                   (one == eight ? "byte-identical" : "DIFFER") + " across --threads 1/8 (" +
                   std::to_string(one.size()) + " bytes)";
  fs::remove_all(dir);
  return outcome;
}

// ---------------------------------------------------------------- criterion 9
Outcome bodyfat_conditional() {
  Outcome outcome;
  const char* path = std::getenv("PENLAB_BODYFAT_CSV");
  if (path == nullptr) {
    outcome.skipped = true;
    outcome.detail = "set PENLAB_BODYFAT_CSV to a body-fat CSV to run this criterion";
    return outcome;
  }
  const char* response = std::getenv("PENLAB_BODYFAT_RESPONSE");
  const TabularDataset raw = load_csv(path, response != nullptr ? response : "BodyFat");

  PipelineConfig config;
  config.methods = all_methods();
  config.repetitions = 100;
  config.base_seed = 20260812;
  Provenance provenance;
  const TabularDataset processed = preprocess(raw, config, &provenance);
  const std::vector<EvaluationRow> rows = real_data_evaluate(processed, config);

  int density_col = -1;
  int seen = 0;
  for (std::size_t c = 0; c < processed.column_names.size(); ++c) {
    if (static_cast<int>(c) == processed.response_col) continue;
    std::string lowered = processed.column_names[c];
    std::transform(lowered.begin(), lowered.end(), lowered.begin(), ::tolower);
    if (lowered.find("density") != std::string::npos) density_col = seen;
    ++seen;
  }
  if (density_col < 0) {
    outcome.passed = false;
    outcome.detail = "no density column found in the supplied dataset";
    return outcome;
  }

  std::ostringstream detail;
  for (const EvaluationRow& row : rows) {
    const bool has_density =
        std::find(row.support.begin(), row.support.end(), density_col) != row.support.end();
    if (!has_density) continue;
    const bool ok = within(row.mean_pct_dev, 0.997, 0.01);
    outcome.passed = outcome.passed && ok;
    detail << method_id(row.method) << "=" << fmt(row.mean_pct_dev, 3) << (ok ? " " : "(!) ");
  }
  outcome.detail = detail.str().empty() ? "no method selected density" : detail.str();
  if (detail.str().empty()) outcome.passed = false;
  return outcome;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "oracle noise calibration", oracle_calibration},
      {2, "orthogonal closed-form equivalence", orthogonal_equivalence},
      {3, "IND desk-scale replication", ind_replication},
      {4, "TOEP-S rho=0.9 desk-scale replication", toeps_replication},
      {5, "dantzig LP exactness", dantzig_exactness},
      {6, "distance correlation suite", distance_correlation_suite},
      {7, "aggregate min/1se ordering", aggregate_ordering},
      {8, "thread-count determinism", cli_determinism},
      {9, "body-fat pipeline (conditional)", bodyfat_conditional},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.passed = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* verdict = outcome.skipped ? "SKIP" : outcome.passed ? "PASS" : "FAIL";
    if (!outcome.skipped && !outcome.passed) ++failures;
    std::printf("[%s] %d. %s (%.1fs): %s\n", verdict, criterion.id, criterion.name, seconds,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all hard criteria passed\n");
  return 0;
}
