#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "penlab/numerics.hpp"
#include "penlab/rng.hpp"
#include "penlab/solvers.hpp"

namespace penlab {

struct LambdaGrid {
  std::vector<double> values;  // strictly decreasing, log-spaced
  double lambda_max = 0.0;
  double eps_ratio = 0.0;
};

/// Grid from a given largest penalty down to eps_ratio times it.
LambdaGrid make_grid(double lambda_max, int n_lambda, double eps_ratio);

/// L1 grid anchored at lambda_max = ||X'y||_inf / n. The default eps_ratio
/// is 1e-4 when n > p and 1e-2 otherwise. Throws ZeroResponse when the
/// anchor is zero.
LambdaGrid lambda_grid(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int n_lambda = 100,
                       std::optional<double> eps_ratio = std::nullopt);

/// Null-model threshold for a weighted L1 penalty: max_j |x_j'y| / (n w_j).
double weighted_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& weights);

/// Fits a whole decreasing penalty grid; column l belongs to grid[l].
using PathSolver = std::function<Eigen::MatrixXd(
    const Eigen::MatrixXd&, const Eigen::VectorXd&, const std::vector<double>&)>;

struct CvSummary {
  std::vector<double> mean_error;  // per observation, pooled over folds
  std::vector<double> std_error;   // spread of the fold means
  int min_index = 0;
  int one_se_index = 0;  // largest penalty within one SE of the minimum
  std::vector<int> fold_of;
};

/// Deterministic K-fold cross-validation: the fold assignment is a
/// permutation partition drawn from the given stream only.
CvSummary kfold_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const PathSolver& solver,
                   const std::vector<double>& grid, int folds, RngStream rng);

struct BicSummary {
  std::vector<double> bic;
  std::vector<int> df;  // support size per grid point
  int chosen_index = 0;
};

/// BIC(l) = n log(RSS_l/n) + log(n) df_l over the grid; ties go to the
/// larger penalty.
BicSummary bic_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      const PathSolver& solver, const std::vector<double>& grid);

/// Ridge coefficients for every grid value via one eigendecomposition.
Eigen::MatrixXd ridge_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const std::vector<double>& grid);

enum class Method {
  kLassoMin,
  kLasso1se,
  kLassoBic,
  kAdaplMin,
  kAdapl1se,
  kScad,
  kDantzig,
  kRelaxedLasso,
  kSqrtLasso,
  kScaledLasso,
  kDcVs,
};

const std::vector<Method>& all_methods();
std::string method_id(Method method);
std::optional<Method> parse_method(const std::string& id);

enum class SelectionRule { kMin, kOneSe, kBic, kFixed, kDefault };
std::string rule_id(SelectionRule rule);
std::optional<SelectionRule> parse_rule(const std::string& id);

/// Method families exposed separately for front ends that pass family and
/// rule as two knobs.
std::optional<Method> make_method(const std::string& family, SelectionRule rule);

struct TuneSettings {
  int cv_folds = 10;
  int n_lambda = 100;
  double scad_a = 3.7;
  double adaptive_q = 2.0;
  std::vector<double> relax_phis = {0.25, 0.5, 0.75, 1.0};
  double dcvs_alpha = 0.05;
  int dcvs_permutations = 200;
  double sqrt_lambda0 = 0.0;    // 0 means 1.1 * qnorm(1 - 0.05/(2p)) / sqrt(n)
  double scaled_lambda0 = 0.0;  // 0 means sqrt(2 log(p)/n)
  SolverControl control;
};

struct TuneDiagnostics {
  double lambda = 0.0;
  std::string rule;
  double phi = 1.0;        // relaxed lasso
  double sigma_hat = 0.0;  // scaled lasso
  std::vector<double> grid;
  std::vector<double> cv_mean;
  std::vector<double> cv_se;
  int cv_min_index = -1;
  int cv_one_se_index = -1;
  int bic_index = -1;
};

/// Runs selection for the method on the standardized design, maps the
/// support back to the original columns and refits OLS on the raw-scale
/// design; refit_beta is the prediction model.
FitResult tune_and_refit(Method method, const StandardizedData& data,
                         const Eigen::MatrixXd& x_raw_centered, RngStream rng,
                         const TuneSettings& settings = {},
                         TuneDiagnostics* diagnostics = nullptr);

}  // namespace penlab
