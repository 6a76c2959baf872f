#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "penlab/model_selection.hpp"
#include "penlab/scenarios.hpp"

namespace penlab {

struct MetricsRecord {
  Scenario scenario = Scenario::kInd;
  int n = 0;
  double rho = 0.0;
  Method method = Method::kLassoMin;
  StandardizationMode mode = StandardizationMode::kRaw;
  int replicate = 0;
  int tp = 0;
  int fp = 0;
  int support_size = 0;
  double mse = 0.0;
  double pct_dev = 0.0;
  std::vector<std::uint8_t> selected;  // per-covariate indicator
  bool failed = false;
  std::string failure;
};

/// In-sample metrics of the refit model against the generating sample;
/// TP/FP count the selection-stage support against the true one.
MetricsRecord compute_metrics(const FitResult& fit, const SimulatedDataset& data);

struct RunConfig {
  ScenarioSpec spec;
  std::vector<Method> methods;
  std::vector<StandardizationMode> modes;
  int replicates = 50;
  std::uint64_t base_seed = 1;
  int threads = 1;
  TuneSettings tune;
};

/// Replicate i draws its dataset from stream (base_seed, i); every
/// (method, mode) pair sees the same dataset within a replicate. Output is
/// ordered by (replicate, method, mode) regardless of thread count. Solver
/// failures are recorded in the affected record instead of aborting.
std::vector<MetricsRecord> run_monte_carlo(const RunConfig& config);

struct AggregateRow {
  Method method = Method::kLassoMin;
  StandardizationMode mode = StandardizationMode::kRaw;
  double mean_tp = 0.0;
  double mean_fp = 0.0;
  double mean_support = 0.0;
  double mean_mse = 0.0;
  double mean_pct_dev = 0.0;
  bool gi = false;    // mean MSE within 10% of the oracle noise variance
  bool over = false;  // mean MSE at or above it (overestimation corrected)
  Eigen::VectorXd selection_frequency;
  int replicates = 0;
  int failures = 0;
};

std::vector<AggregateRow> aggregate(const std::vector<MetricsRecord>& records, double sigma_eps);

/// Per-replicate records; round-trips exactly through records_from_csv.
std::string records_to_csv(const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> records_from_csv(const std::string& text);

/// Fixed column order: scenario,n,rho,method,mode,tp,fp,mse,pct_dev,gi,over
/// followed by mean_support and failures.
std::string aggregate_to_csv(const std::vector<AggregateRow>& rows, const ScenarioSpec& spec,
                             double sigma_eps);
std::vector<AggregateRow> aggregate_from_csv(const std::string& text);

/// Markdown table in the usual benchmark layout, oracle values bracketed in
/// the header; GI entries are bold, overestimation-corrected ones boxed.
std::string aggregate_to_markdown(const std::vector<AggregateRow>& rows,
                                  const ScenarioSpec& spec, double sigma_eps);

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

}  // namespace penlab
