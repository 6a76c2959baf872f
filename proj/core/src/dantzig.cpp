#include "penlab/dantzig.hpp"

#include <cmath>

#include "penlab/errors.hpp"
#include "penlab/solvers.hpp"

namespace penlab {
namespace {

constexpr double kZeroClip = 1e-9;

}  // namespace

DantzigPathSolver::DantzigPathSolver(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (y.size() != x.rows()) throw DimensionMismatch("dantzig: y length must equal X rows");
  p_ = x.cols();
  const double n = static_cast<double>(x.rows());
  gram_ = x.transpose() * x / n;
  xty_ = x.transpose() * y / n;

  // Split beta = b+ - b-; rows encode -lambda <= xty - G(b+ - b-) <= lambda.
  lp_.cost = Eigen::VectorXd::Ones(2 * p_);
  lp_.constraints.resize(2 * p_, 2 * p_);
  lp_.constraints.block(0, 0, p_, p_) = -gram_;
  lp_.constraints.block(0, p_, p_, p_) = gram_;
  lp_.constraints.block(p_, 0, p_, p_) = gram_;
  lp_.constraints.block(p_, p_, p_, p_) = -gram_;
  lp_.bounds = Eigen::VectorXd::Zero(2 * p_);
}

Eigen::VectorXd DantzigPathSolver::bounds_for(double lambda) const {
  Eigen::VectorXd bounds(2 * p_);
  bounds.head(p_) = Eigen::VectorXd::Constant(p_, lambda) - xty_;
  bounds.tail(p_) = Eigen::VectorXd::Constant(p_, lambda) + xty_;
  return bounds;
}

DantzigSolution DantzigPathSolver::finish(const SimplexSolution& lp_solution,
                                          double lambda) const {
  DantzigSolution out;
  out.beta = lp_solution.x.head(p_) - lp_solution.x.tail(p_);
  for (Eigen::Index j = 0; j < p_; ++j) {
    if (std::abs(out.beta[j]) <= kZeroClip) out.beta[j] = 0.0;
  }
  out.support = nonzero_support(out.beta);
  out.objective = out.beta.lpNorm<1>();
  const double correlation = (xty_ - gram_ * out.beta).lpNorm<Eigen::Infinity>();
  out.feasibility_residual = std::max(0.0, correlation - lambda);
  out.iterations = lp_solution.iterations;
  return out;
}

DantzigSolution DantzigPathSolver::solve_at(double lambda) {
  if (lambda < 0.0) throw InvalidArgument("dantzig: lambda must be >= 0");
  const Eigen::VectorXd bounds = bounds_for(lambda);
  if (have_basis_) {
    try {
      DantzigSolution warm = finish(tableau_->resolve_with_bounds(bounds), lambda);
      if (warm.feasibility_residual <= 1e-6) return warm;
      have_basis_ = false;  // drifted basis, redo from scratch
    } catch (const Error&) {
      have_basis_ = false;
    }
  }
  lp_.bounds = bounds;
  tableau_ = std::make_unique<SimplexTableau>(lp_);
  DantzigSolution out = finish(tableau_->solve(), lambda);
  have_basis_ = true;
  return out;
}

Eigen::MatrixXd DantzigPathSolver::path(const std::vector<double>& grid) {
  Eigen::MatrixXd out(p_, static_cast<Eigen::Index>(grid.size()));
  for (std::size_t l = 0; l < grid.size(); ++l) {
    out.col(static_cast<Eigen::Index>(l)) = solve_at(grid[l]).beta;
  }
  return out;
}

DantzigSolution dantzig_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               double lambda) {
  DantzigPathSolver solver(x, y);
  return solver.solve_at(lambda);
}

}  // namespace penlab
