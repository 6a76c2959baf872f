#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "penlab/model_selection.hpp"
#include "penlab/numerics.hpp"

namespace penlab {

struct TabularDataset {
  std::vector<std::string> column_names;
  Eigen::MatrixXd values;  // n x (p + 1), response included
  int response_col = -1;
  int rows_dropped = 0;  // rows rejected at ingestion for missing cells
};

/// Numeric CSV with a header row. Rows containing empty cells are dropped
/// and counted; a non-numeric cell raises ParseFailure with its location.
TabularDataset load_csv(const std::string& path, const std::string& response_name);

struct BoxCoxResult {
  Eigen::VectorXd transformed;
  double lambda_hat = 0.0;
};

/// Power transform of (column + shift), the exponent picked by profile
/// log-likelihood over [-2, 2] in steps of 0.01; the log branch is used at
/// zero. Monotone increasing for every exponent.
BoxCoxResult boxcox_transform(const Eigen::VectorXd& column, double shift);

struct TrimResult {
  TabularDataset data;
  std::vector<int> removed_rows;  // indices into the input, ascending
};

/// Drops the floor(fraction * n) rows with the lowest depth 1/(1 + d^2),
/// where d is the Mahalanobis distance to the column means over all columns.
TrimResult mahalanobis_trim(const TabularDataset& data, double fraction);

struct PipelineConfig {
  double boxcox_shift = 0.01;
  double trim_fraction = 0.05;
  double train_fraction = 0.8;
  int repetitions = 100;
  StandardizationMode mode = StandardizationMode::kUnivariate;
  std::vector<Method> methods;
  std::uint64_t base_seed = 1;
  bool apply_boxcox = true;
  bool apply_trim = true;
  bool rss0_train_mean = false;      // test-set mean is the default centering
  bool selection_per_split = false;  // leakage-free variant: reselect per split
  TuneSettings tune;
};

std::string pipeline_config_to_json(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const std::string& text);

struct Provenance {
  std::vector<double> boxcox_lambdas;  // aligned with column_names; NaN if skipped
  std::vector<int> removed_rows;
};

/// Box-Cox each column, then depth-trim, per the config switches.
TabularDataset preprocess(const TabularDataset& data, const PipelineConfig& config,
                          Provenance* provenance = nullptr);

std::string provenance_to_json(const Provenance& provenance,
                               const std::vector<std::string>& column_names);

struct EvaluationRow {
  Method method = Method::kLassoMin;
  double mean_mse = 0.0;
  double mean_pct_dev = 0.0;
  std::vector<int> support;  // full-sample selection, covariate indices
  int repetitions = 0;
  int failures = 0;
};

/// Full-sample selection per method, then repeated train/test splits scoring
/// the OLS refit of the selected support on held-out rows. Split k depends
/// only on (base_seed, k); the train support is capped at train size - 1.
std::vector<EvaluationRow> real_data_evaluate(const TabularDataset& data,
                                              const PipelineConfig& config);

std::string evaluation_to_csv(const std::vector<EvaluationRow>& rows,
                              const std::vector<std::string>& covariate_names);

}  // namespace penlab
