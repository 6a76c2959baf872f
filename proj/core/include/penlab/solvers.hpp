#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "penlab/errors.hpp"
#include "penlab/numerics.hpp"

namespace penlab {

struct SolverControl {
  double tol = 1e-7;      // convergence threshold on max coefficient change
  int max_iter = 100000;  // sweep cap
  bool active_set_cycling = true;
};

enum class PenaltyKind { kLasso, kWeightedLasso, kScad, kRidge };

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::kLasso;
  double lambda = 0.0;      // objective is (1/(2n))||y - X b||^2 + lambda * pen(b)
  Eigen::VectorXd weights;  // weighted lasso only, all >= 0
  double scad_a = 3.7;      // SCAD only, > 2

  static PenaltySpec lasso(double lambda);
  static PenaltySpec weighted_lasso(double lambda, Eigen::VectorXd weights);
  static PenaltySpec scad(double lambda, double a = 3.7);
};

struct FitResult {
  Eigen::VectorXd beta;       // on the scale of the fitted design
  std::vector<int> support;   // indices with beta != 0, increasing
  double lambda_used = 0.0;
  std::optional<Eigen::VectorXd> refit_beta;  // original covariate scale
  int iterations = 0;
  bool converged = false;
  bool dropped_collinear = false;
};

std::vector<int> nonzero_support(const Eigen::VectorXd& beta);

/// sign(z) * max(|z| - gamma, 0)
double soft_threshold(double z, double gamma);

/// Cyclic coordinate descent for the (optionally weighted) L1 objective.
/// Converged results carry a KKT certificate at the control tolerance:
/// |x_j'r/n - lambda w_j sign(b_j)| <= tol on the support and
/// |x_j'r/n| <= lambda w_j + tol off it.
FitResult lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   const PenaltySpec& penalty, const SolverControl& control = {},
                   const Eigen::VectorXd* warm_start = nullptr);

/// Warm-started fits across a decreasing penalty grid; column l holds the
/// coefficients for grid[l].
Eigen::MatrixXd lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const std::vector<double>& grid,
                           const Eigen::VectorXd* weights = nullptr,
                           const SolverControl& control = {});

/// Exact coordin-wise solution for designs whose Gram matrix is diagonal.
/// Throws NotOrthogonal when an off-diagonal Gram entry is non-negligible.
Eigen::VectorXd orthogonal_closed_form(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                       double lambda);

/// Solves (X'X/n + lambda I) b = X'y/n.
Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda);

inline constexpr double kAdaptiveWeightCap = 1e12;

/// w_j = 1/|b_j|^q, capped at kAdaptiveWeightCap for vanishing coefficients.
Eigen::VectorXd adaptive_weights(const Eigen::VectorXd& beta_ridge, double q = 1.0);

/// Penalty value p_lambda(|b|): linear near zero, quadratic blend on
/// (lambda, a*lambda], constant beyond.
double scad_penalty(double beta, double lambda, double a);

/// Exact minimizer of (v/2) b^2 - z b + scad_penalty(|b|, lambda, a) over b.
double scad_univariate_update(double z, double v, double lambda, double a);

/// Coordinate descent on the SCAD objective; each coordinate step is an
/// exact univariate minimization, so sweeps never increase the objective.
FitResult scad_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                   double a = 3.7, const SolverControl& control = {},
                   const Eigen::VectorXd* warm_start = nullptr);

Eigen::MatrixXd scad_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const std::vector<double>& grid, double a = 3.7,
                          const SolverControl& control = {});

/// Two-stage fit: lasso at lambda fixes the support, then an L1 fit with
/// penalty phi*lambda restricted to that support. Off-support coordinates
/// stay exactly zero; an empty first-stage support yields the zero fit.
FitResult relaxed_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                        double phi, const SolverControl& control = {});

struct ScaledLassoTrace {
  double lambda;
  double objective_before;  // L_lambda at the previous iterate
  double objective_after;   // L_lambda at the refreshed iterate
};

struct ScaledLassoResult {
  FitResult fit;
  double sigma_hat = 0.0;
  std::vector<ScaledLassoTrace> trace;
};

/// Alternates sigma <- ||y - X b||/sqrt(n) and an L1 fit at sigma*lambda0
/// until the noise scale stabilises. Throws DegenerateSigma when the
/// residual collapses (interpolation) or y is identically zero.
ScaledLassoResult scaled_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               double lambda0, const SolverControl& control = {});

/// Square-root objective ||y - X b||_2 + lambda ||b||_1, solved through the
/// scaled fixed point with lambda0 = lambda/sqrt(n).
FitResult sqrt_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                     const SolverControl& control = {});

/// OLS on the selected original-scale columns, zeros elsewhere. Supports of
/// size >= n are truncated to the n-1 entries with the largest |magnitude|
/// before refitting; collinear selected columns are dropped (later columns
/// lose) and flagged through dropped_collinear.
Eigen::VectorXd ols_refit(const Eigen::MatrixXd& x_raw, const Eigen::VectorXd& y,
                          const std::vector<int>& support,
                          const Eigen::VectorXd* magnitude = nullptr,
                          bool* dropped_collinear = nullptr);

}  // namespace penlab
