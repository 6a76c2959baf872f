#pragma once

#include <Eigen/Dense>

#include "penlab/errors.hpp"
#include "penlab/rng.hpp"

namespace penlab {

enum class StandardizationMode { kRaw, kUnivariate };

const char* to_string(StandardizationMode mode);

/// Centered design and response plus the column scales used, so supports and
/// coefficients can be mapped back to the original covariate scale.
struct StandardizedData {
  Eigen::MatrixXd x;       // columns have mean 0; unit sd when univariate
  Eigen::VectorXd y;       // mean 0
  Eigen::VectorXd scales;  // sd with divisor n (all ones for raw mode)
  StandardizationMode mode = StandardizationMode::kRaw;
};

/// Center columns and response; divide columns by their sd (divisor n) in
/// univariate mode. Throws ConstantColumn for zero-variance columns in
/// univariate mode, DimensionMismatch for shape problems.
StandardizedData center_and_standardize(const Eigen::MatrixXd& x_raw,
                                        const Eigen::VectorXd& y_raw,
                                        StandardizationMode mode);

struct CovarianceSpec {
  enum class Base { kIdentity, kToeplitz };
  Base base = Base::kIdentity;
  double rho = 0.0;             // used by Toeplitz only, |rho| < 1
  Eigen::VectorXd scale_diag;   // per-covariate variances, all > 0

  static CovarianceSpec identity(int p);
  static CovarianceSpec toeplitz(int p, double rho);
};

/// Sigma[j,k] = sigma_j * sigma_k * rho^|j-k| with exact diagonal scale_diag.
Eigen::MatrixXd build_covariance(const CovarianceSpec& spec);

/// Lower Cholesky factor. A pivot below 1e-12 times the largest diagonal
/// entry is treated as a failure and throws NotPositiveDefinite.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& sigma);

/// n iid rows of N(0, sigma), generated as Z * L^T from the given stream.
Eigen::MatrixXd mvn_sample(int n, const Eigen::MatrixXd& sigma, RngStream& rng);

/// Least squares for full-column-rank X; throws SingularSystem otherwise.
Eigen::VectorXd ols_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Inverse standard normal CDF, accurate to ~1e-13 over (0, 1).
double normal_quantile(double p);

}  // namespace penlab
