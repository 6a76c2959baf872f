#include "penlab/solvers.hpp"

#include <algorithm>
#include <cmath>

namespace penlab {
namespace {

void validate_control(const SolverControl& control) {
  if (!(control.tol > 0.0) || control.max_iter < 1) {
    throw InvalidArgument("solver control: tol must be > 0 and max_iter >= 1");
  }
}

Eigen::VectorXd effective_weights(const PenaltySpec& penalty, Eigen::Index p) {
  if (penalty.kind == PenaltyKind::kWeightedLasso) {
    if (penalty.weights.size() != p) {
      throw DimensionMismatch("weighted lasso: weight vector length must equal p");
    }
    if (!penalty.weights.allFinite() || (penalty.weights.array() < 0.0).any()) {
      throw InvalidArgument("weighted lasso: weights must be finite and nonnegative");
    }
    return penalty.weights;
  }
  return Eigen::VectorXd::Ones(p);
}

double l1_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& beta, double lambda) {
  const double n = static_cast<double>(x.rows());
  return (y - x * beta).squaredNorm() / (2.0 * n) + lambda * beta.lpNorm<1>();
}

bool kkt_satisfied(const Eigen::MatrixXd& x, const Eigen::VectorXd& residual,
                   const Eigen::VectorXd& beta, double lambda, const Eigen::VectorXd& weights,
                   double tol) {
  const double n = static_cast<double>(x.rows());
  const Eigen::VectorXd grad = x.transpose() * residual / n;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) {
      const double sign = beta[j] > 0.0 ? 1.0 : -1.0;
      if (std::abs(grad[j] - lambda * weights[j] * sign) > tol) return false;
    } else if (std::abs(grad[j]) > lambda * weights[j] + tol) {
      return false;
    }
  }
  return true;
}

}  // namespace

PenaltySpec PenaltySpec::lasso(double lambda) {
  PenaltySpec spec;
  spec.kind = PenaltyKind::kLasso;
  spec.lambda = lambda;
  return spec;
}

PenaltySpec PenaltySpec::weighted_lasso(double lambda, Eigen::VectorXd weights) {
  PenaltySpec spec;
  spec.kind = PenaltyKind::kWeightedLasso;
  spec.lambda = lambda;
  spec.weights = std::move(weights);
  return spec;
}

PenaltySpec PenaltySpec::scad(double lambda, double a) {
  PenaltySpec spec;
  spec.kind = PenaltyKind::kScad;
  spec.lambda = lambda;
  spec.scad_a = a;
  return spec;
}

std::vector<int> nonzero_support(const Eigen::VectorXd& beta) {
  std::vector<int> support;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) support.push_back(static_cast<int>(j));
  }
  return support;
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

FitResult lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   const PenaltySpec& penalty, const SolverControl& control,
                   const Eigen::VectorXd* warm_start) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw DimensionMismatch("lasso_cd: y length must equal X rows");
  if (penalty.kind != PenaltyKind::kLasso && penalty.kind != PenaltyKind::kWeightedLasso) {
    throw InvalidArgument("lasso_cd: penalty must be lasso or weighted lasso");
  }
  if (penalty.lambda < 0.0) throw InvalidArgument("lasso_cd: lambda must be >= 0");
  validate_control(control);

  FitResult out;
  out.lambda_used = penalty.lambda;
  out.beta = Eigen::VectorXd::Zero(p);
  if (y.isZero(0.0)) {
    out.converged = true;
    return out;
  }

  const Eigen::VectorXd weights = effective_weights(penalty, p);
  const Eigen::VectorXd col_var = x.colwise().squaredNorm() / static_cast<double>(n);
  const double lambda = penalty.lambda;

  Eigen::VectorXd beta =
      (warm_start != nullptr && warm_start->size() == p) ? *warm_start : Eigen::VectorXd::Zero(p);
  Eigen::VectorXd residual = beta.isZero(0.0) ? y : (y - x * beta).eval();

  auto update_one = [&](Eigen::Index j) -> double {
    if (col_var[j] <= 0.0) return 0.0;
    const double z = x.col(j).dot(residual) / static_cast<double>(n) + col_var[j] * beta[j];
    const double updated = soft_threshold(z, lambda * weights[j]) / col_var[j];
    const double diff = updated - beta[j];
    if (diff != 0.0) {
      residual -= diff * x.col(j);
      beta[j] = updated;
    }
    return std::abs(diff);
  };

  int sweeps = 0;
  bool certified = false;
  while (sweeps < control.max_iter) {
    double full_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) full_change = std::max(full_change, update_one(j));
    ++sweeps;

    if (control.active_set_cycling) {
      while (sweeps < control.max_iter) {
        double active_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
          if (beta[j] != 0.0) active_change = std::max(active_change, update_one(j));
        }
        ++sweeps;
        if (active_change <= control.tol) break;
      }
    }

    if (full_change <= control.tol &&
        kkt_satisfied(x, residual, beta, lambda, weights, control.tol)) {
      certified = true;
      break;
    }
  }

  out.beta = std::move(beta);
  out.support = nonzero_support(out.beta);
  out.iterations = sweeps;
  out.converged = certified;
  return out;
}

Eigen::MatrixXd lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const std::vector<double>& grid, const Eigen::VectorXd* weights,
                           const SolverControl& control) {
  const Eigen::Index p = x.cols();
  Eigen::MatrixXd path(p, static_cast<Eigen::Index>(grid.size()));
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(p);
  for (std::size_t l = 0; l < grid.size(); ++l) {
    const PenaltySpec penalty = weights != nullptr
                                    ? PenaltySpec::weighted_lasso(grid[l], *weights)
                                    : PenaltySpec::lasso(grid[l]);
    warm = lasso_cd(x, y, penalty, control, &warm).beta;
    path.col(static_cast<Eigen::Index>(l)) = warm;
  }
  return path;
}

Eigen::VectorXd orthogonal_closed_form(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                       double lambda) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw DimensionMismatch("orthogonal_closed_form: y length must equal X rows");
  if (lambda < 0.0) throw InvalidArgument("orthogonal_closed_form: lambda must be >= 0");

  const Eigen::MatrixXd gram = x.transpose() * x;
  const double max_diag = gram.diagonal().maxCoeff();
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = j + 1; k < p; ++k) {
      if (std::abs(gram(j, k)) > 1e-8 * max_diag) {
        throw NotOrthogonal("orthogonal_closed_form: Gram matrix has off-diagonal entry " +
                            std::to_string(gram(j, k)));
      }
    }
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double gj = gram(j, j) / static_cast<double>(n);
    if (gj <= 0.0) continue;
    beta[j] = soft_threshold(x.col(j).dot(y) / static_cast<double>(n), lambda) / gj;
  }
  return beta;
}

Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  const Eigen::Index n = x.rows();
  if (y.size() != n) throw DimensionMismatch("ridge_fit: y length must equal X rows");
  if (lambda < 0.0) throw InvalidArgument("ridge_fit: lambda must be >= 0");
  if (lambda == 0.0) {
    if (x.cols() >= n) throw SingularSystem("ridge_fit: lambda = 0 requires n > p");
    return ols_solve(x, y);
  }
  Eigen::MatrixXd a = x.transpose() * x / static_cast<double>(n);
  a.diagonal().array() += lambda;
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SingularSystem("ridge_fit: penalized normal equations not positive definite");
  }
  return llt.solve(x.transpose() * y / static_cast<double>(n));
}

Eigen::VectorXd adaptive_weights(const Eigen::VectorXd& beta_ridge, double q) {
  if (q < 1.0) throw InvalidArgument("adaptive_weights: q must be >= 1");
  Eigen::VectorXd weights(beta_ridge.size());
  for (Eigen::Index j = 0; j < beta_ridge.size(); ++j) {
    const double mag = std::abs(beta_ridge[j]);
    if (mag == 0.0) {
      weights[j] = kAdaptiveWeightCap;
    } else {
      weights[j] = std::min(kAdaptiveWeightCap, 1.0 / std::pow(mag, q));
    }
  }
  return weights;
}

double scad_penalty(double beta, double lambda, double a) {
  const double mag = std::abs(beta);
  if (mag <= lambda) return lambda * mag;
  if (mag <= a * lambda) {
    return (2.0 * a * lambda * mag - mag * mag - lambda * lambda) / (2.0 * (a - 1.0));
  }
  return lambda * lambda * (a + 1.0) / 2.0;
}

double scad_univariate_update(double z, double v, double lambda, double a) {
  if (!(v > 0.0)) throw InvalidArgument("scad_univariate_update: v must be > 0");
  if (!(a > 2.0)) throw InvalidArgument("scad_univariate_update: a must be > 2");
  if (lambda < 0.0) throw InvalidArgument("scad_univariate_update: lambda must be >= 0");
  if (lambda == 0.0) return z / v;

  const double sign = z < 0.0 ? -1.0 : 1.0;
  const double zmag = std::abs(z);
  const auto objective = [&](double b) {
    return 0.5 * v * b * b - zmag * b + scad_penalty(b, lambda, a);
  };

  // Minimize over b >= 0 by comparing the per-region stationary points and
  // the region boundaries; the objective decides, so a concave middle
  // region (possible when v <= 1/(a-1)) is still handled exactly.
  double best_b = 0.0;
  double best_value = 0.0;  // objective(0)
  const auto consider = [&](double b) {
    if (!(b > 0.0) || !std::isfinite(b)) return;
    const double value = objective(b);
    if (value < best_value) {
      best_value = value;
      best_b = b;
    }
  };

  const double b1 = (zmag - lambda) / v;
  if (b1 > 0.0 && b1 <= lambda) consider(b1);
  const double denom = v - 1.0 / (a - 1.0);
  if (denom > 0.0) {
    const double b2 = (zmag - a * lambda / (a - 1.0)) / denom;
    if (b2 > lambda && b2 <= a * lambda) consider(b2);
  }
  const double b3 = zmag / v;
  if (b3 > a * lambda) consider(b3);
  consider(lambda);
  consider(a * lambda);

  return sign * best_b;
}

FitResult scad_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, double a,
                   const SolverControl& control, const Eigen::VectorXd* warm_start) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw DimensionMismatch("scad_fit: y length must equal X rows");
  if (!(a > 2.0)) throw InvalidArgument("scad_fit: a must be > 2");
  if (lambda < 0.0) throw InvalidArgument("scad_fit: lambda must be >= 0");
  validate_control(control);

  FitResult out;
  out.lambda_used = lambda;
  out.beta = Eigen::VectorXd::Zero(p);
  if (y.isZero(0.0)) {
    out.converged = true;
    return out;
  }

  const Eigen::VectorXd col_var = x.colwise().squaredNorm() / static_cast<double>(n);
  Eigen::VectorXd beta =
      (warm_start != nullptr && warm_start->size() == p) ? *warm_start : Eigen::VectorXd::Zero(p);
  Eigen::VectorXd residual = beta.isZero(0.0) ? y : (y - x * beta).eval();

  auto update_one = [&](Eigen::Index j) -> double {
    if (col_var[j] <= 0.0) return 0.0;
    const double z = x.col(j).dot(residual) / static_cast<double>(n) + col_var[j] * beta[j];
    const double updated = scad_univariate_update(z, col_var[j], lambda, a);
    const double diff = updated - beta[j];
    if (diff != 0.0) {
      residual -= diff * x.col(j);
      beta[j] = updated;
    }
    return std::abs(diff);
  };

  // Stationarity certificate: no coordinate wants to move by more than tol.
  const auto stationary = [&]() {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_var[j] <= 0.0) continue;
      const double z = x.col(j).dot(residual) / static_cast<double>(n) + col_var[j] * beta[j];
      if (std::abs(scad_univariate_update(z, col_var[j], lambda, a) - beta[j]) > control.tol) {
        return false;
      }
    }
    return true;
  };

  int sweeps = 0;
  bool certified = false;
  while (sweeps < control.max_iter) {
    double full_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) full_change = std::max(full_change, update_one(j));
    ++sweeps;

    if (control.active_set_cycling) {
      while (sweeps < control.max_iter) {
        double active_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
          if (beta[j] != 0.0) active_change = std::max(active_change, update_one(j));
        }
        ++sweeps;
        if (active_change <= control.tol) break;
      }
    }

    if (full_change <= control.tol && stationary()) {
      certified = true;
      break;
    }
  }

  out.beta = std::move(beta);
  out.support = nonzero_support(out.beta);
  out.iterations = sweeps;
  out.converged = certified;
  return out;
}

Eigen::MatrixXd scad_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const std::vector<double>& grid, double a,
                          const SolverControl& control) {
  const Eigen::Index p = x.cols();
  Eigen::MatrixXd path(p, static_cast<Eigen::Index>(grid.size()));
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(p);
  for (std::size_t l = 0; l < grid.size(); ++l) {
    warm = scad_fit(x, y, grid[l], a, control, &warm).beta;
    path.col(static_cast<Eigen::Index>(l)) = warm;
  }
  return path;
}

FitResult relaxed_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                        double phi, const SolverControl& control) {
  if (!(phi > 0.0) || phi > 1.0) throw InvalidArgument("relaxed_lasso: phi must be in (0, 1]");

  FitResult stage1 = lasso_cd(x, y, PenaltySpec::lasso(lambda), control);
  if (stage1.support.empty()) {
    stage1.lambda_used = lambda;
    return stage1;  // zero fit
  }
  if (phi == 1.0) return stage1;

  const auto m = static_cast<Eigen::Index>(stage1.support.size());
  Eigen::MatrixXd x_sub(x.rows(), m);
  Eigen::VectorXd warm(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    x_sub.col(i) = x.col(stage1.support[static_cast<std::size_t>(i)]);
    warm[i] = stage1.beta[stage1.support[static_cast<std::size_t>(i)]];
  }
  const FitResult stage2 =
      lasso_cd(x_sub, y, PenaltySpec::lasso(phi * lambda), control, &warm);

  FitResult out;
  out.beta = Eigen::VectorXd::Zero(x.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    out.beta[stage1.support[static_cast<std::size_t>(i)]] = stage2.beta[i];
  }
  out.support = nonzero_support(out.beta);
  out.lambda_used = lambda;
  out.iterations = stage1.iterations + stage2.iterations;
  out.converged = stage1.converged && stage2.converged;
  return out;
}

ScaledLassoResult scaled_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               double lambda0, const SolverControl& control) {
  if (!(lambda0 > 0.0)) throw InvalidArgument("scaled_lasso: lambda0 must be > 0");
  validate_control(control);
  const double n = static_cast<double>(x.rows());
  if (y.size() != x.rows()) throw DimensionMismatch("scaled_lasso: y length must equal X rows");

  const double initial_sigma = y.norm() / std::sqrt(n);
  if (initial_sigma == 0.0) throw DegenerateSigma("scaled_lasso: response is identically zero");
  const double sigma_floor = 1e-10 * initial_sigma;

  constexpr int kMaxOuter = 100;
  ScaledLassoResult out;
  double sigma = initial_sigma;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  int total_iterations = 0;
  bool converged = false;

  for (int outer = 0; outer < kMaxOuter; ++outer) {
    const double lambda = sigma * lambda0;
    const double before = l1_objective(x, y, beta, lambda);
    const FitResult fit = lasso_cd(x, y, PenaltySpec::lasso(lambda), control, &beta);
    total_iterations += fit.iterations;
    beta = fit.beta;
    out.trace.push_back({lambda, before, l1_objective(x, y, beta, lambda)});

    const double sigma_new = (y - x * beta).norm() / std::sqrt(n);
    if (sigma_new <= sigma_floor) {
      throw DegenerateSigma("scaled_lasso: residual scale collapsed to zero");
    }
    const bool sigma_settled = std::abs(sigma_new - sigma) <= control.tol * sigma;
    sigma = sigma_new;
    if (sigma_settled && fit.converged) {
      converged = true;
      break;
    }
  }

  out.sigma_hat = sigma;
  out.fit.beta = std::move(beta);
  out.fit.support = nonzero_support(out.fit.beta);
  out.fit.lambda_used = sigma * lambda0;
  out.fit.iterations = total_iterations;
  out.fit.converged = converged;
  return out;
}

FitResult sqrt_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                     const SolverControl& control) {
  if (lambda < 0.0) throw InvalidArgument("sqrt_lasso: lambda must be >= 0");
  if (lambda == 0.0) {
    FitResult fit = lasso_cd(x, y, PenaltySpec::lasso(0.0), control);
    fit.lambda_used = 0.0;
    return fit;
  }
  ScaledLassoResult scaled =
      scaled_lasso(x, y, lambda / std::sqrt(static_cast<double>(x.rows())), control);
  FitResult fit = std::move(scaled.fit);
  fit.lambda_used = lambda;
  return fit;
}

Eigen::VectorXd ols_refit(const Eigen::MatrixXd& x_raw, const Eigen::VectorXd& y,
                          const std::vector<int>& support, const Eigen::VectorXd* magnitude,
                          bool* dropped_collinear) {
  const Eigen::Index n = x_raw.rows();
  const Eigen::Index p = x_raw.cols();
  if (y.size() != n) throw DimensionMismatch("ols_refit: y length must equal X rows");
  if (dropped_collinear != nullptr) *dropped_collinear = false;

  std::vector<int> selected = support;
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  for (int j : selected) {
    if (j < 0 || j >= p) throw InvalidArgument("ols_refit: support index out of range");
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
  if (selected.empty()) return out;

  // Supports at least as large as n cannot be refit; keep the n-1 strongest.
  if (static_cast<Eigen::Index>(selected.size()) >= n) {
    if (magnitude != nullptr) {
      std::stable_sort(selected.begin(), selected.end(), [&](int lhs, int rhs) {
        return std::abs((*magnitude)[lhs]) > std::abs((*magnitude)[rhs]);
      });
    }
    selected.resize(static_cast<std::size_t>(n - 1));
    std::sort(selected.begin(), selected.end());
  }

  // Greedy modified Gram-Schmidt; a column inside the span of the earlier
  // kept ones is dropped.
  std::vector<int> kept;
  Eigen::MatrixXd basis(n, static_cast<Eigen::Index>(selected.size()));
  Eigen::Index rank = 0;
  for (int j : selected) {
    Eigen::VectorXd v = x_raw.col(j);
    const double norm0 = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < rank; ++k) v -= basis.col(k).dot(v) * basis.col(k);
    }
    if (norm0 == 0.0 || v.norm() <= 1e-10 * norm0) {
      if (dropped_collinear != nullptr) *dropped_collinear = true;
      continue;
    }
    basis.col(rank) = v / v.norm();
    kept.push_back(j);
    ++rank;
  }
  if (kept.empty()) return out;

  Eigen::MatrixXd x_sub(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    x_sub.col(static_cast<Eigen::Index>(i)) = x_raw.col(kept[i]);
  }
  const Eigen::VectorXd coef = ols_solve(x_sub, y);
  for (std::size_t i = 0; i < kept.size(); ++i) out[kept[i]] = coef[static_cast<Eigen::Index>(i)];
  return out;
}

}  // namespace penlab
