#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "penlab/rng.hpp"

namespace penlab {

struct DcorStat {
  double dcov_sq = 0.0;  // squared distance covariance (V-statistic)
  double dcor = 0.0;     // in [0, 1]; 0 when either marginal variance vanishes
  int n = 0;
};

/// Double-centered pairwise absolute-distance matrix of u.
Eigen::MatrixXd centered_distance_matrix(const Eigen::VectorXd& u);

/// (1/n^2) sum of the elementwise product of two centered distance matrices.
double mean_elementwise_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

DcorStat dcor(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Permutation p-value for H0: eps independent of xj, using squared distance
/// covariance as the statistic. p = (1 + #{permuted >= observed})/(B + 1),
/// so the smallest attainable value is 1/(B + 1). Requires B >= 99.
double independence_test(const Eigen::VectorXd& eps, const Eigen::VectorXd& xj, int permutations,
                         RngStream& rng);

/// Forward selection on distance correlation: repeatedly pick the remaining
/// column most associated with the current residual, keep it while the
/// permutation test rejects at level alpha, and refresh the residual by an
/// OLS refit on the kept set. A collinear refit stops the loop with the
/// flag set (the winning column is kept, it was already accepted).
std::vector<int> dcvs_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha,
                             int permutations, RngStream rng, bool* singular_refit = nullptr);

enum class ScreenMethod { kR2, kDc, kPls };

std::string screen_method_id(ScreenMethod method);
std::optional<ScreenMethod> parse_screen_method(const std::string& id);

struct ScreenRanking {
  ScreenMethod method = ScreenMethod::kR2;
  Eigen::VectorXd scores;
  std::vector<int> order;  // decreasing score, positional ties
};

/// Marginal relevance scores: squared Pearson correlation (R2), distance
/// correlation (DC), or normalized first-component weights |x_j'y| (PLS).
ScreenRanking screen_rank(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          ScreenMethod method);

}  // namespace penlab
