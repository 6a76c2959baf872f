#include "penlab/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "penlab/dantzig.hpp"
#include "penlab/screening.hpp"

namespace penlab {
namespace {

std::vector<int> shuffled_indices(Eigen::Index n, RngStream& rng) {
  std::vector<int> indices(static_cast<std::size_t>(n));
  std::iota(indices.begin(), indices.end(), 0);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(j)]);
  }
  return indices;
}

struct FoldSplit {
  Eigen::MatrixXd x_train, x_test;
  Eigen::VectorXd y_train, y_test;
};

FoldSplit split_fold(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const std::vector<int>& fold_of, int fold) {
  const Eigen::Index n = x.rows();
  Eigen::Index n_test = 0;
  for (int f : fold_of) n_test += (f == fold);
  FoldSplit split;
  split.x_train.resize(n - n_test, x.cols());
  split.x_test.resize(n_test, x.cols());
  split.y_train.resize(n - n_test);
  split.y_test.resize(n_test);
  Eigen::Index it = 0;
  Eigen::Index is = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (fold_of[static_cast<std::size_t>(i)] == fold) {
      split.x_test.row(is) = x.row(i);
      split.y_test[is] = y[i];
      ++is;
    } else {
      split.x_train.row(it) = x.row(i);
      split.y_train[it] = y[i];
      ++it;
    }
  }
  return split;
}

double universal_lambda0(Eigen::Index n, Eigen::Index p) {
  return std::sqrt(2.0 * std::log(static_cast<double>(p)) / static_cast<double>(n));
}

// Ridge grids have no natural null threshold; anchor at 1000x the L1 one
// (the usual mixing-weight floor of 0.001).
constexpr double kRidgeAnchorInflation = 1000.0;

}  // namespace

LambdaGrid make_grid(double lambda_max, int n_lambda, double eps_ratio) {
  if (n_lambda < 1) throw InvalidArgument("make_grid: need at least one grid point");
  if (!(lambda_max > 0.0)) throw ZeroResponse("make_grid: lambda_max must be positive");
  if (!(eps_ratio > 0.0) || eps_ratio >= 1.0) {
    throw InvalidArgument("make_grid: eps_ratio must lie in (0, 1)");
  }
  LambdaGrid grid;
  grid.lambda_max = lambda_max;
  grid.eps_ratio = eps_ratio;
  grid.values.resize(static_cast<std::size_t>(n_lambda));
  if (n_lambda == 1) {
    grid.values[0] = lambda_max;
    return grid;
  }
  for (int i = 0; i < n_lambda; ++i) {
    grid.values[static_cast<std::size_t>(i)] =
        lambda_max * std::pow(eps_ratio, static_cast<double>(i) / (n_lambda - 1));
  }
  return grid;
}

LambdaGrid lambda_grid(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int n_lambda,
                       std::optional<double> eps_ratio) {
  // Inflate the anchor by 1e-13 so the null model holds at the grid top even
  // when a solver's per-column dot product rounds differently than the gemv
  // used here.
  const double lambda_max =
      (x.transpose() * y).lpNorm<Eigen::Infinity>() / static_cast<double>(x.rows()) *
      (1.0 + 1e-13);
  if (!(lambda_max > 0.0)) {
    throw ZeroResponse("lambda_grid: X'y is zero, no penalty scale available");
  }
  const double eps = eps_ratio.value_or(x.rows() > x.cols() ? 1e-4 : 1e-2);
  return make_grid(lambda_max, n_lambda, eps);
}

double weighted_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& weights) {
  if (weights.size() != x.cols()) {
    throw DimensionMismatch("weighted_lambda_max: weights length must equal p");
  }
  const Eigen::VectorXd correlations = (x.transpose() * y) / static_cast<double>(x.rows());
  double lambda_max = 0.0;
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    if (weights[j] > 0.0) {
      lambda_max = std::max(lambda_max, std::abs(correlations[j]) / weights[j]);
    }
  }
  if (!(lambda_max > 0.0)) {
    throw ZeroResponse("weighted_lambda_max: no positive-weight coordinate correlates with y");
  }
  return lambda_max;
}

CvSummary kfold_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const PathSolver& solver,
                   const std::vector<double>& grid, int folds, RngStream rng) {
  const Eigen::Index n = x.rows();
  if (folds < 2 || static_cast<Eigen::Index>(folds) > n) {
    throw FoldTooSmall("kfold_cv: need 2 <= K <= n");
  }
  const auto n_lambda = grid.size();
  if (n_lambda == 0) throw InvalidArgument("kfold_cv: empty grid");

  CvSummary summary;
  summary.fold_of.assign(static_cast<std::size_t>(n), 0);
  const std::vector<int> order = shuffled_indices(n, rng);
  // contiguous blocks of the permutation; the first n % K folds get one extra
  const Eigen::Index base = n / folds;
  const Eigen::Index extra = n % folds;
  Eigen::Index pos = 0;
  for (int f = 0; f < folds; ++f) {
    const Eigen::Index size = base + (f < extra ? 1 : 0);
    for (Eigen::Index i = 0; i < size; ++i) {
      summary.fold_of[static_cast<std::size_t>(order[static_cast<std::size_t>(pos++)])] = f;
    }
  }

  std::vector<double> pooled_sq(n_lambda, 0.0);
  std::vector<std::vector<double>> fold_means(static_cast<std::size_t>(folds),
                                              std::vector<double>(n_lambda, 0.0));
  for (int f = 0; f < folds; ++f) {
    const FoldSplit split = split_fold(x, y, summary.fold_of, f);
    const Eigen::MatrixXd path = solver(split.x_train, split.y_train, grid);
    const double n_test = static_cast<double>(split.y_test.size());
    for (std::size_t l = 0; l < n_lambda; ++l) {
      const double sq =
          (split.y_test - split.x_test * path.col(static_cast<Eigen::Index>(l))).squaredNorm();
      pooled_sq[l] += sq;
      fold_means[static_cast<std::size_t>(f)][l] = sq / n_test;
    }
  }

  summary.mean_error.resize(n_lambda);
  summary.std_error.resize(n_lambda);
  for (std::size_t l = 0; l < n_lambda; ++l) {
    summary.mean_error[l] = pooled_sq[l] / static_cast<double>(n);
    double fold_avg = 0.0;
    for (int f = 0; f < folds; ++f) fold_avg += fold_means[static_cast<std::size_t>(f)][l];
    fold_avg /= folds;
    double var = 0.0;
    for (int f = 0; f < folds; ++f) {
      const double d = fold_means[static_cast<std::size_t>(f)][l] - fold_avg;
      var += d * d;
    }
    var /= (folds - 1);
    summary.std_error[l] = std::sqrt(var / folds);
  }

  summary.min_index = 0;
  for (std::size_t l = 1; l < n_lambda; ++l) {
    if (summary.mean_error[l] <
        summary.mean_error[static_cast<std::size_t>(summary.min_index)]) {
      summary.min_index = static_cast<int>(l);
    }
  }
  const double threshold = summary.mean_error[static_cast<std::size_t>(summary.min_index)] +
                           summary.std_error[static_cast<std::size_t>(summary.min_index)];
  summary.one_se_index = summary.min_index;
  for (std::size_t l = 0; l < n_lambda; ++l) {
    if (summary.mean_error[l] <= threshold) {
      summary.one_se_index = static_cast<int>(l);
      break;
    }
  }
  return summary;
}

BicSummary bic_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      const PathSolver& solver, const std::vector<double>& grid) {
  if (grid.empty()) throw InvalidArgument("bic_select: empty grid");
  const double n = static_cast<double>(x.rows());
  const Eigen::MatrixXd path = solver(x, y, grid);

  BicSummary summary;
  summary.bic.resize(grid.size());
  summary.df.resize(grid.size());
  for (std::size_t l = 0; l < grid.size(); ++l) {
    const Eigen::VectorXd beta = path.col(static_cast<Eigen::Index>(l));
    const double rss = (y - x * beta).squaredNorm();
    int df = 0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) df += (beta[j] != 0.0);
    summary.df[l] = df;
    summary.bic[l] = n * std::log(std::max(rss, 1e-300) / n) + std::log(n) * df;
  }
  summary.chosen_index = 0;
  for (std::size_t l = 1; l < grid.size(); ++l) {
    if (summary.bic[l] < summary.bic[static_cast<std::size_t>(summary.chosen_index)]) {
      summary.chosen_index = static_cast<int>(l);
    }
  }
  return summary;
}

Eigen::MatrixXd ridge_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const std::vector<double>& grid) {
  const double n = static_cast<double>(x.rows());
  const Eigen::MatrixXd gram = x.transpose() * x / n;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(gram);
  const Eigen::VectorXd spectrum = eigen.eigenvalues().cwiseMax(0.0);
  const Eigen::VectorXd rotated = eigen.eigenvectors().transpose() * (x.transpose() * y / n);

  Eigen::MatrixXd path(x.cols(), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t l = 0; l < grid.size(); ++l) {
    if (!(grid[l] > 0.0)) throw InvalidArgument("ridge_path: penalties must be positive");
    path.col(static_cast<Eigen::Index>(l)) =
        eigen.eigenvectors() *
        (rotated.array() / (spectrum.array() + grid[l])).matrix();
  }
  return path;
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {
      Method::kLassoMin,  Method::kLasso1se,     Method::kLassoBic, Method::kAdaplMin,
      Method::kAdapl1se,  Method::kScad,         Method::kDantzig,  Method::kRelaxedLasso,
      Method::kSqrtLasso, Method::kScaledLasso,  Method::kDcVs};
  return methods;
}

std::string method_id(Method method) {
  switch (method) {
    case Method::kLassoMin: return "lasso.min";
    case Method::kLasso1se: return "lasso.1se";
    case Method::kLassoBic: return "lasso.bic";
    case Method::kAdaplMin: return "adapl.min";
    case Method::kAdapl1se: return "adapl.1se";
    case Method::kScad: return "scad";
    case Method::kDantzig: return "dant";
    case Method::kRelaxedLasso: return "relaxl";
    case Method::kSqrtLasso: return "sqrtl";
    case Method::kScaledLasso: return "scall";
    case Method::kDcVs: return "dc.vs";
  }
  return "unknown";
}

std::optional<Method> parse_method(const std::string& id) {
  for (Method m : all_methods()) {
    if (method_id(m) == id) return m;
  }
  return std::nullopt;
}

std::string rule_id(SelectionRule rule) {
  switch (rule) {
    case SelectionRule::kMin: return "min";
    case SelectionRule::kOneSe: return "1se";
    case SelectionRule::kBic: return "bic";
    case SelectionRule::kFixed: return "fixed";
    case SelectionRule::kDefault: return "default";
  }
  return "unknown";
}

std::optional<SelectionRule> parse_rule(const std::string& id) {
  if (id == "min") return SelectionRule::kMin;
  if (id == "1se") return SelectionRule::kOneSe;
  if (id == "bic") return SelectionRule::kBic;
  if (id == "fixed") return SelectionRule::kFixed;
  if (id == "default" || id.empty()) return SelectionRule::kDefault;
  return std::nullopt;
}

std::optional<Method> make_method(const std::string& family, SelectionRule rule) {
  if (family == "lasso") {
    if (rule == SelectionRule::kMin || rule == SelectionRule::kDefault) return Method::kLassoMin;
    if (rule == SelectionRule::kOneSe) return Method::kLasso1se;
    if (rule == SelectionRule::kBic) return Method::kLassoBic;
    return std::nullopt;
  }
  if (family == "adapl") {
    if (rule == SelectionRule::kMin || rule == SelectionRule::kDefault) return Method::kAdaplMin;
    if (rule == SelectionRule::kOneSe) return Method::kAdapl1se;
    return std::nullopt;
  }
  if (family == "scad") {
    if (rule == SelectionRule::kMin || rule == SelectionRule::kDefault) return Method::kScad;
    return std::nullopt;
  }
  if (family == "dant") {
    if (rule == SelectionRule::kOneSe || rule == SelectionRule::kDefault) return Method::kDantzig;
    return std::nullopt;
  }
  if (family == "relaxl") {
    if (rule == SelectionRule::kMin || rule == SelectionRule::kDefault) {
      return Method::kRelaxedLasso;
    }
    return std::nullopt;
  }
  if (family == "sqrtl" && rule == SelectionRule::kDefault) return Method::kSqrtLasso;
  if (family == "scall" && rule == SelectionRule::kDefault) return Method::kScaledLasso;
  if (family == "dc.vs" && rule == SelectionRule::kDefault) return Method::kDcVs;
  return std::nullopt;
}

namespace {

struct Selection {
  Eigen::VectorXd beta;  // standardized scale
  double lambda = 0.0;
  int iterations = 0;
  bool converged = true;
};

Selection select_l1_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool use_one_se,
                       RngStream rng, const TuneSettings& s, const Eigen::VectorXd* weights,
                       TuneDiagnostics* diag) {
  LambdaGrid grid = weights == nullptr
                        ? lambda_grid(x, y, s.n_lambda)
                        : make_grid(weighted_lambda_max(x, y, *weights), s.n_lambda,
                                    x.rows() > x.cols() ? 1e-4 : 1e-2);
  const PathSolver solver = [&s, weights](const Eigen::MatrixXd& xt, const Eigen::VectorXd& yt,
                                          const std::vector<double>& g) {
    return lasso_path(xt, yt, g, weights, s.control);
  };
  const CvSummary cv = kfold_cv(x, y, solver, grid.values, s.cv_folds, rng);
  const int index = use_one_se ? cv.one_se_index : cv.min_index;

  const Eigen::MatrixXd full_path = solver(x, y, grid.values);
  Selection out;
  out.beta = full_path.col(index);
  out.lambda = grid.values[static_cast<std::size_t>(index)];
  if (diag != nullptr) {
    diag->grid = grid.values;
    diag->cv_mean = cv.mean_error;
    diag->cv_se = cv.std_error;
    diag->cv_min_index = cv.min_index;
    diag->cv_one_se_index = cv.one_se_index;
    diag->lambda = out.lambda;
  }
  return out;
}

Selection select_lasso_bic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const TuneSettings& s, TuneDiagnostics* diag) {
  const LambdaGrid grid = lambda_grid(x, y, s.n_lambda);
  const PathSolver solver = [&s](const Eigen::MatrixXd& xt, const Eigen::VectorXd& yt,
                                 const std::vector<double>& g) {
    return lasso_path(xt, yt, g, nullptr, s.control);
  };
  const BicSummary bic = bic_select(x, y, solver, grid.values);
  const Eigen::MatrixXd path = solver(x, y, grid.values);
  Selection out;
  out.beta = path.col(bic.chosen_index);
  out.lambda = grid.values[static_cast<std::size_t>(bic.chosen_index)];
  if (diag != nullptr) {
    diag->grid = grid.values;
    diag->bic_index = bic.chosen_index;
    diag->lambda = out.lambda;
  }
  return out;
}

Eigen::VectorXd ridge_weights_by_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                    RngStream rng, const TuneSettings& s) {
  const double anchor =
      (x.transpose() * y).lpNorm<Eigen::Infinity>() / static_cast<double>(x.rows());
  if (!(anchor > 0.0)) throw ZeroResponse("adaptive weights: X'y is zero");
  const LambdaGrid grid = make_grid(anchor * kRidgeAnchorInflation, s.n_lambda,
                                    x.rows() > x.cols() ? 1e-4 : 1e-2);
  const PathSolver solver = [](const Eigen::MatrixXd& xt, const Eigen::VectorXd& yt,
                               const std::vector<double>& g) { return ridge_path(xt, yt, g); };
  const CvSummary cv = kfold_cv(x, y, solver, grid.values, s.cv_folds, rng);
  const Eigen::MatrixXd path = ridge_path(x, y, grid.values);
  return adaptive_weights(path.col(cv.min_index), s.adaptive_q);
}

Selection select_scad_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, RngStream rng,
                         const TuneSettings& s, TuneDiagnostics* diag) {
  const LambdaGrid grid = lambda_grid(x, y, s.n_lambda);
  const PathSolver solver = [&s](const Eigen::MatrixXd& xt, const Eigen::VectorXd& yt,
                                 const std::vector<double>& g) {
    return scad_path(xt, yt, g, s.scad_a, s.control);
  };
  const CvSummary cv = kfold_cv(x, y, solver, grid.values, s.cv_folds, rng);
  const Eigen::MatrixXd path = solver(x, y, grid.values);
  Selection out;
  out.beta = path.col(cv.min_index);
  out.lambda = grid.values[static_cast<std::size_t>(cv.min_index)];
  if (diag != nullptr) {
    diag->grid = grid.values;
    diag->cv_mean = cv.mean_error;
    diag->cv_se = cv.std_error;
    diag->cv_min_index = cv.min_index;
    diag->cv_one_se_index = cv.one_se_index;
    diag->lambda = out.lambda;
  }
  return out;
}

Selection select_dantzig_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, RngStream rng,
                            const TuneSettings& s, TuneDiagnostics* diag) {
  // The selector's reference grid stops at sqrt(log(p)/n) times the anchor
  // rather than descending to the L1 floor; searching below that range
  // trades the selector's characteristic conservatism away.
  const double floor_ratio =
      std::min(0.9, std::sqrt(std::log(static_cast<double>(x.cols())) /
                              static_cast<double>(x.rows())));
  const LambdaGrid grid =
      make_grid((x.transpose() * y).lpNorm<Eigen::Infinity>() / static_cast<double>(x.rows()),
                s.n_lambda, floor_ratio);
  const PathSolver solver = [](const Eigen::MatrixXd& xt, const Eigen::VectorXd& yt,
                               const std::vector<double>& g) {
    return DantzigPathSolver(xt, yt).path(g);
  };
  const CvSummary cv = kfold_cv(x, y, solver, grid.values, s.cv_folds, rng);
  const int index = cv.one_se_index;
  DantzigPathSolver full(x, y);
  Selection out;
  out.beta = full.solve_at(grid.values[static_cast<std::size_t>(index)]).beta;
  out.lambda = grid.values[static_cast<std::size_t>(index)];
  if (diag != nullptr) {
    diag->grid = grid.values;
    diag->cv_mean = cv.mean_error;
    diag->cv_se = cv.std_error;
    diag->cv_min_index = cv.min_index;
    diag->cv_one_se_index = cv.one_se_index;
    diag->lambda = out.lambda;
  }
  return out;
}

Selection select_relaxed_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, RngStream rng,
                            const TuneSettings& s, TuneDiagnostics* diag) {
  const LambdaGrid grid = lambda_grid(x, y, s.n_lambda);
  const auto n_lambda = grid.values.size();
  const auto n_phi = s.relax_phis.size();
  if (n_phi == 0) throw InvalidArgument("relaxed lasso: empty phi set");

  // Joint CV over the (lambda, phi) grid. Stage-two fits reuse the
  // first-stage path support per lambda.
  const Eigen::Index n = x.rows();
  // reuse the deterministic fold assignment logic with a null-model solver
  const CvSummary folds_only = kfold_cv(
      x, y,
      [](const Eigen::MatrixXd& xt, const Eigen::VectorXd&, const std::vector<double>& g) {
        return Eigen::MatrixXd::Zero(xt.cols(), static_cast<Eigen::Index>(g.size()));
      },
      {1.0}, s.cv_folds, rng);
  std::vector<std::vector<double>> pooled(
      n_lambda, std::vector<double>(n_phi, 0.0));
  for (int f = 0; f < s.cv_folds; ++f) {
    const FoldSplit split = split_fold(x, y, folds_only.fold_of, f);
    const Eigen::MatrixXd path = lasso_path(split.x_train, split.y_train, grid.values, nullptr,
                                            s.control);
    for (std::size_t l = 0; l < n_lambda; ++l) {
      const Eigen::VectorXd stage1 = path.col(static_cast<Eigen::Index>(l));
      const std::vector<int> support = nonzero_support(stage1);
      for (std::size_t ip = 0; ip < n_phi; ++ip) {
        const double phi = s.relax_phis[ip];
        Eigen::VectorXd beta;
        if (phi == 1.0 || support.empty()) {
          beta = stage1;
        } else {
          Eigen::MatrixXd x_sub(split.x_train.rows(),
                                static_cast<Eigen::Index>(support.size()));
          Eigen::VectorXd warm(static_cast<Eigen::Index>(support.size()));
          for (std::size_t i = 0; i < support.size(); ++i) {
            x_sub.col(static_cast<Eigen::Index>(i)) = split.x_train.col(support[i]);
            warm[static_cast<Eigen::Index>(i)] = stage1[support[i]];
          }
          const FitResult sub = lasso_cd(x_sub, split.y_train,
                                         PenaltySpec::lasso(phi * grid.values[l]), s.control,
                                         &warm);
          beta = Eigen::VectorXd::Zero(x.cols());
          for (std::size_t i = 0; i < support.size(); ++i) {
            beta[support[i]] = sub.beta[static_cast<Eigen::Index>(i)];
          }
        }
        pooled[l][ip] += (split.y_test - split.x_test * beta).squaredNorm();
      }
    }
  }

  std::size_t best_l = 0;
  std::size_t best_p = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < n_lambda; ++l) {
    for (std::size_t ip = 0; ip < n_phi; ++ip) {
      const double err = pooled[l][ip] / static_cast<double>(n);
      if (err < best_err) {
        best_err = err;
        best_l = l;
        best_p = ip;
      }
    }
  }

  const FitResult fit =
      relaxed_lasso(x, y, grid.values[best_l], s.relax_phis[best_p], s.control);
  Selection out;
  out.beta = fit.beta;
  out.lambda = grid.values[best_l];
  out.iterations = fit.iterations;
  out.converged = fit.converged;
  if (diag != nullptr) {
    diag->grid = grid.values;
    diag->lambda = out.lambda;
    diag->phi = s.relax_phis[best_p];
  }
  return out;
}

}  // namespace

FitResult tune_and_refit(Method method, const StandardizedData& data,
                         const Eigen::MatrixXd& x_raw_centered, RngStream rng,
                         const TuneSettings& settings, TuneDiagnostics* diagnostics) {
  const Eigen::MatrixXd& x = data.x;
  const Eigen::VectorXd& y = data.y;
  if (x_raw_centered.rows() != x.rows() || x_raw_centered.cols() != x.cols()) {
    throw DimensionMismatch("tune_and_refit: raw design shape must match the standardized one");
  }

  Selection selection;
  std::string rule = "default";
  switch (method) {
    case Method::kLassoMin:
      selection = select_l1_cv(x, y, false, rng.split(1), settings, nullptr, diagnostics);
      rule = "min";
      break;
    case Method::kLasso1se:
      selection = select_l1_cv(x, y, true, rng.split(1), settings, nullptr, diagnostics);
      rule = "1se";
      break;
    case Method::kLassoBic:
      selection = select_lasso_bic(x, y, settings, diagnostics);
      rule = "bic";
      break;
    case Method::kAdaplMin:
    case Method::kAdapl1se: {
      const Eigen::VectorXd weights = ridge_weights_by_cv(x, y, rng.split(2), settings);
      selection = select_l1_cv(x, y, method == Method::kAdapl1se, rng.split(3), settings,
                               &weights, diagnostics);
      rule = method == Method::kAdapl1se ? "1se" : "min";
      break;
    }
    case Method::kScad:
      selection = select_scad_cv(x, y, rng.split(4), settings, diagnostics);
      rule = "min";
      break;
    case Method::kDantzig:
      selection = select_dantzig_cv(x, y, rng.split(5), settings, diagnostics);
      rule = "1se";
      break;
    case Method::kRelaxedLasso:
      selection = select_relaxed_cv(x, y, rng.split(6), settings, diagnostics);
      rule = "min";
      break;
    case Method::kSqrtLasso: {
      // quantile-based default level: 1.1 * qnorm(1 - 0.05/(2p)) in the
      // sqrt objective's own units
      const double lambda0 =
          settings.sqrt_lambda0 > 0.0
              ? settings.sqrt_lambda0
              : 1.1 *
                    normal_quantile(1.0 - 0.05 / (2.0 * static_cast<double>(x.cols()))) /
                    std::sqrt(static_cast<double>(x.rows()));
      const double lambda = lambda0 * std::sqrt(static_cast<double>(x.rows()));
      const FitResult fit = sqrt_lasso(x, y, lambda, settings.control);
      selection.beta = fit.beta;
      selection.lambda = lambda;
      selection.iterations = fit.iterations;
      selection.converged = fit.converged;
      if (diagnostics != nullptr) diagnostics->lambda = lambda;
      break;
    }
    case Method::kScaledLasso: {
      const double lambda0 = settings.scaled_lambda0 > 0.0
                                 ? settings.scaled_lambda0
                                 : universal_lambda0(x.rows(), x.cols());
      const ScaledLassoResult scaled = scaled_lasso(x, y, lambda0, settings.control);
      selection.beta = scaled.fit.beta;
      selection.lambda = scaled.fit.lambda_used;
      selection.iterations = scaled.fit.iterations;
      selection.converged = scaled.fit.converged;
      if (diagnostics != nullptr) {
        diagnostics->lambda = scaled.fit.lambda_used;
        diagnostics->sigma_hat = scaled.sigma_hat;
      }
      break;
    }
    case Method::kDcVs: {
      bool singular = false;
      const std::vector<int> support =
          dcvs_select(x, y, settings.dcvs_alpha, settings.dcvs_permutations, rng.split(7),
                      &singular);
      selection.beta = Eigen::VectorXd::Zero(x.cols());
      if (!support.empty()) {
        const Eigen::VectorXd coef = ols_refit(x, y, support);
        selection.beta = coef;
      }
      break;
    }
  }

  FitResult out;
  out.beta = selection.beta;
  out.support = nonzero_support(selection.beta);
  out.lambda_used = selection.lambda;
  out.iterations = selection.iterations;
  out.converged = selection.converged;
  const Eigen::VectorXd magnitude = selection.beta.cwiseAbs();
  bool dropped = false;
  out.refit_beta = ols_refit(x_raw_centered, y, out.support, &magnitude, &dropped);
  out.dropped_collinear = dropped;
  if (diagnostics != nullptr) diagnostics->rule = rule;
  return out;
}

}  // namespace penlab
