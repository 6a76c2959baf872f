#include "penlab/screening.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "penlab/errors.hpp"
#include "penlab/numerics.hpp"
#include "penlab/solvers.hpp"

namespace penlab {
namespace {

double dcov_sq_permuted(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        const std::vector<int>& perm) {
  const Eigen::Index n = a.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int pi = perm[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      total += a(pi, perm[static_cast<std::size_t>(j)]) * b(i, j);
    }
  }
  return total / static_cast<double>(n * n);
}

std::vector<int> random_permutation(Eigen::Index n, RngStream& rng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

DcorStat dcor_from_centered(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  DcorStat stat;
  stat.n = static_cast<int>(a.rows());
  stat.dcov_sq = std::max(0.0, mean_elementwise_product(a, b));
  const double var_u = mean_elementwise_product(a, a);
  const double var_v = mean_elementwise_product(b, b);
  if (var_u > 0.0 && var_v > 0.0) {
    stat.dcor = std::sqrt(stat.dcov_sq / std::sqrt(var_u * var_v));
    stat.dcor = std::clamp(stat.dcor, 0.0, 1.0);
  }
  return stat;
}

}  // namespace

Eigen::MatrixXd centered_distance_matrix(const Eigen::VectorXd& u) {
  const Eigen::Index n = u.size();
  if (n < 2) throw DimensionMismatch("centered_distance_matrix: need n >= 2");
  Eigen::MatrixXd dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = std::abs(u[i] - u[j]);
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }
  const Eigen::VectorXd row_means = dist.rowwise().mean();
  const double grand_mean = row_means.mean();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      dist(i, j) += grand_mean - row_means[i] - row_means[j];
    }
  }
  return dist;
}

double mean_elementwise_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.cwiseProduct(b).sum() / static_cast<double>(a.rows() * a.cols());
}

DcorStat dcor(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) throw DimensionMismatch("dcor: vectors must share length");
  return dcor_from_centered(centered_distance_matrix(u), centered_distance_matrix(v));
}

double independence_test(const Eigen::VectorXd& eps, const Eigen::VectorXd& xj, int permutations,
                         RngStream& rng) {
  if (permutations < 99) throw InvalidArgument("independence_test: need at least 99 permutations");
  if (eps.size() != xj.size()) throw DimensionMismatch("independence_test: length mismatch");

  const Eigen::MatrixXd a = centered_distance_matrix(eps);
  const Eigen::MatrixXd b = centered_distance_matrix(xj);
  const double observed = mean_elementwise_product(a, b);

  int at_least = 0;
  for (int t = 0; t < permutations; ++t) {
    const std::vector<int> perm = random_permutation(eps.size(), rng);
    if (dcov_sq_permuted(a, b, perm) >= observed) ++at_least;
  }
  return static_cast<double>(1 + at_least) / static_cast<double>(permutations + 1);
}

std::vector<int> dcvs_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha,
                             int permutations, RngStream rng, bool* singular_refit) {
  if (!(alpha > 0.0) || alpha >= 1.0) throw InvalidArgument("dcvs_select: alpha must be in (0,1)");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw DimensionMismatch("dcvs_select: y length must equal X rows");
  if (singular_refit != nullptr) *singular_refit = false;

  // column distance matrices are reused across forward steps
  std::vector<std::unique_ptr<Eigen::MatrixXd>> col_centered(static_cast<std::size_t>(p));
  std::vector<double> col_dvar(static_cast<std::size_t>(p), -1.0);
  const auto column_matrix = [&](Eigen::Index j) -> const Eigen::MatrixXd& {
    auto& slot = col_centered[static_cast<std::size_t>(j)];
    if (!slot) {
      slot = std::make_unique<Eigen::MatrixXd>(centered_distance_matrix(x.col(j)));
      col_dvar[static_cast<std::size_t>(j)] = mean_elementwise_product(*slot, *slot);
    }
    return *slot;
  };

  std::vector<int> selected;
  std::vector<char> remaining(static_cast<std::size_t>(p), 1);
  Eigen::VectorXd residual = y;
  const auto max_selected = static_cast<std::size_t>(std::min<Eigen::Index>(n - 1, p));

  for (std::uint64_t step = 0; selected.size() < max_selected; ++step) {
    const Eigen::MatrixXd res_centered = centered_distance_matrix(residual);
    const double res_dvar = mean_elementwise_product(res_centered, res_centered);
    if (!(res_dvar > 0.0)) break;  // constant residual, nothing left to explain

    int best = -1;
    double best_dcor = -1.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!remaining[static_cast<std::size_t>(j)]) continue;
      const Eigen::MatrixXd& bj = column_matrix(j);
      const double dv = col_dvar[static_cast<std::size_t>(j)];
      if (!(dv > 0.0)) continue;
      const double cov = std::max(0.0, mean_elementwise_product(res_centered, bj));
      const double r = std::sqrt(cov / std::sqrt(res_dvar * dv));
      if (r > best_dcor) {
        best_dcor = r;
        best = static_cast<int>(j);
      }
    }
    if (best < 0) break;

    // Permutation test calibrated for the selection: the null statistic is
    // the maximum over the remaining candidates of the squared distance
    // covariance normalized by each column's distance variance, i.e. the
    // same ranking statistic that picked the tested column (the residual's
    // own distance variance is permutation invariant and cancels). A
    // per-column null would be anti-conservative and add noise at nearly
    // every step.
    RngStream test_rng = rng.split(step);
    const double observed =
        std::max(0.0, mean_elementwise_product(res_centered, column_matrix(best))) /
        std::sqrt(col_dvar[static_cast<std::size_t>(best)]);
    int at_least = 0;
    for (int t = 0; t < permutations; ++t) {
      const std::vector<int> perm = random_permutation(n, test_rng);
      double stat = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (!remaining[static_cast<std::size_t>(j)]) continue;
        const double dv = col_dvar[static_cast<std::size_t>(j)];
        if (!(dv > 0.0)) continue;
        stat = std::max(stat, dcov_sq_permuted(res_centered, column_matrix(j), perm) /
                                  std::sqrt(dv));
        if (stat >= observed) break;  // already counted, skip the rest
      }
      if (stat >= observed) ++at_least;
    }
    const double p_value =
        static_cast<double>(1 + at_least) / static_cast<double>(permutations + 1);
    if (p_value > alpha) break;

    selected.push_back(best);
    remaining[static_cast<std::size_t>(best)] = 0;

    Eigen::MatrixXd x_sub(n, static_cast<Eigen::Index>(selected.size()));
    for (std::size_t i = 0; i < selected.size(); ++i) {
      x_sub.col(static_cast<Eigen::Index>(i)) = x.col(selected[i]);
    }
    try {
      const Eigen::VectorXd coef = ols_solve(x_sub, y);
      residual = y - x_sub * coef;
    } catch (const SingularSystem&) {
      if (singular_refit != nullptr) *singular_refit = true;
      break;
    }
  }

  std::sort(selected.begin(), selected.end());
  return selected;
}

std::string screen_method_id(ScreenMethod method) {
  switch (method) {
    case ScreenMethod::kR2: return "r2";
    case ScreenMethod::kDc: return "dc";
    case ScreenMethod::kPls: return "pls";
  }
  return "unknown";
}

std::optional<ScreenMethod> parse_screen_method(const std::string& id) {
  if (id == "r2") return ScreenMethod::kR2;
  if (id == "dc") return ScreenMethod::kDc;
  if (id == "pls") return ScreenMethod::kPls;
  return std::nullopt;
}

ScreenRanking screen_rank(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          ScreenMethod method) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw DimensionMismatch("screen_rank: y length must equal X rows");

  ScreenRanking ranking;
  ranking.method = method;
  ranking.scores = Eigen::VectorXd::Zero(p);

  if (method == ScreenMethod::kR2) {
    const Eigen::VectorXd yc = (y.array() - y.mean()).matrix();
    const double ss_y = yc.squaredNorm();
    for (Eigen::Index j = 0; j < p; ++j) {
      const Eigen::VectorXd xc = (x.col(j).array() - x.col(j).mean()).matrix();
      const double ss_x = xc.squaredNorm();
      if (ss_x <= 0.0) {
        throw ConstantColumn("screen_rank: column " + std::to_string(j) + " is constant");
      }
      if (ss_y > 0.0) {
        const double c = xc.dot(yc);
        ranking.scores[j] = (c * c) / (ss_x * ss_y);
      }
    }
  } else if (method == ScreenMethod::kDc) {
    const Eigen::MatrixXd a = centered_distance_matrix(y);
    const double var_y = mean_elementwise_product(a, a);
    for (Eigen::Index j = 0; j < p; ++j) {
      const Eigen::MatrixXd b = centered_distance_matrix(x.col(j));
      const double var_x = mean_elementwise_product(b, b);
      if (var_y > 0.0 && var_x > 0.0) {
        const double cov = std::max(0.0, mean_elementwise_product(a, b));
        ranking.scores[j] = std::clamp(std::sqrt(cov / std::sqrt(var_y * var_x)), 0.0, 1.0);
      }
    }
  } else {
    // first latent component weights
    Eigen::VectorXd w = x.transpose() * y;
    const double norm = w.norm();
    if (norm > 0.0) w /= norm;
    ranking.scores = w.cwiseAbs();
  }

  ranking.order.resize(static_cast<std::size_t>(p));
  std::iota(ranking.order.begin(), ranking.order.end(), 0);
  std::stable_sort(ranking.order.begin(), ranking.order.end(), [&](int lhs, int rhs) {
    return ranking.scores[lhs] > ranking.scores[rhs];
  });
  return ranking;
}

}  // namespace penlab
