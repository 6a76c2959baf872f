#include "penlab/numerics.hpp"

#include <cmath>

namespace penlab {
namespace {

// Neumaier compensated sum; keeps column means near machine epsilon even for
// long columns with mixed magnitudes.
double compensated_sum(const Eigen::VectorXd& v) {
  double sum = 0.0;
  double comp = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double t = sum + v[i];
    if (std::abs(sum) >= std::abs(v[i])) {
      comp += (sum - t) + v[i];
    } else {
      comp += (v[i] - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

void center_in_place(Eigen::VectorXd& v) {
  const double n = static_cast<double>(v.size());
  v.array() -= compensated_sum(v) / n;
  // second pass removes the O(eps) residual mean
  v.array() -= compensated_sum(v) / n;
}

}  // namespace

const char* to_string(StandardizationMode mode) {
  return mode == StandardizationMode::kRaw ? "raw" : "univ";
}

StandardizedData center_and_standardize(const Eigen::MatrixXd& x_raw,
                                        const Eigen::VectorXd& y_raw,
                                        StandardizationMode mode) {
  const Eigen::Index n = x_raw.rows();
  const Eigen::Index p = x_raw.cols();
  if (n < 2 || p < 1) {
    throw DimensionMismatch("center_and_standardize: need n >= 2 and p >= 1");
  }
  if (y_raw.size() != n) {
    throw DimensionMismatch("center_and_standardize: y length does not match X rows");
  }

  StandardizedData out;
  out.mode = mode;
  out.x = x_raw;
  out.y = y_raw;
  out.scales = Eigen::VectorXd::Ones(p);

  center_in_place(out.y);
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::VectorXd col = out.x.col(j);
    center_in_place(col);
    out.x.col(j) = col;
    if (mode == StandardizationMode::kUnivariate) {
      const double range = x_raw.col(j).maxCoeff() - x_raw.col(j).minCoeff();
      const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n));
      if (range == 0.0 || sd <= 0.0) {
        throw ConstantColumn("center_and_standardize: column " + std::to_string(j) +
                             " has zero variance");
      }
      out.x.col(j) /= sd;
      out.scales[j] = sd;
    }
  }
  return out;
}

CovarianceSpec CovarianceSpec::identity(int p) {
  CovarianceSpec spec;
  spec.base = Base::kIdentity;
  spec.scale_diag = Eigen::VectorXd::Ones(p);
  return spec;
}

CovarianceSpec CovarianceSpec::toeplitz(int p, double rho) {
  CovarianceSpec spec;
  spec.base = Base::kToeplitz;
  spec.rho = rho;
  spec.scale_diag = Eigen::VectorXd::Ones(p);
  return spec;
}

Eigen::MatrixXd build_covariance(const CovarianceSpec& spec) {
  const Eigen::Index p = spec.scale_diag.size();
  if (p < 1) {
    throw InvalidArgument("build_covariance: empty scale diagonal");
  }
  const double rho = spec.base == CovarianceSpec::Base::kToeplitz ? spec.rho : 0.0;
  if (std::abs(rho) >= 1.0) {
    throw InvalidArgument("build_covariance: |rho| must be < 1");
  }
  if ((spec.scale_diag.array() <= 0.0).any()) {
    throw InvalidArgument("build_covariance: scale variances must be positive");
  }

  const Eigen::VectorXd sigma = spec.scale_diag.array().sqrt();
  Eigen::MatrixXd cov(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    cov(j, j) = spec.scale_diag[j];  // exact, no sqrt round-trip
    for (Eigen::Index k = j + 1; k < p; ++k) {
      const double value = sigma[j] * sigma[k] * std::pow(rho, static_cast<double>(k - j));
      cov(j, k) = value;
      cov(k, j) = value;
    }
  }
  return cov;
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& sigma) {
  const Eigen::Index p = sigma.rows();
  if (sigma.cols() != p || p < 1) {
    throw DimensionMismatch("cholesky_lower: matrix must be square");
  }
  const double max_diag = sigma.diagonal().maxCoeff();
  const double pivot_floor = 1e-12 * max_diag;

  Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double d = sigma(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
    if (!(d > pivot_floor)) {
      throw NotPositiveDefinite("cholesky_lower: pivot " + std::to_string(d) + " at column " +
                                std::to_string(j));
    }
    lower(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < p; ++i) {
      double s = sigma(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
      lower(i, j) = s / lower(j, j);
    }
  }
  return lower;
}

Eigen::MatrixXd mvn_sample(int n, const Eigen::MatrixXd& sigma, RngStream& rng) {
  if (n < 1) {
    throw InvalidArgument("mvn_sample: n must be positive");
  }
  const Eigen::MatrixXd lower = cholesky_lower(sigma);
  const Eigen::Index p = sigma.rows();
  Eigen::MatrixXd z(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      z(i, j) = rng.next_gaussian();
    }
  }
  return z * lower.transpose();
}

Eigen::VectorXd ols_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) {
    throw DimensionMismatch("ols_solve: X rows must match y length");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols()) {
    throw SingularSystem("ols_solve: design matrix is column rank deficient");
  }
  return qr.solve(y);
}

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw InvalidArgument("normal_quantile: p must lie strictly inside (0, 1)");
  }
  // Acklam's rational approximation, then one Halley step against erfc.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  const double err = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  const double u = err / pdf;
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace penlab
