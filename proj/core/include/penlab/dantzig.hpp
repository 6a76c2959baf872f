#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "penlab/simplex.hpp"

namespace penlab {

struct DantzigSolution {
  Eigen::VectorXd beta;
  double objective = 0.0;             // ||beta||_1
  double feasibility_residual = 0.0;  // max(0, ||X'(y - X beta)/n||_inf - lambda)
  std::vector<int> support;
  int iterations = 0;
};

/// L1-minimal coefficients subject to ||X'(y - X beta)/n||_inf <= lambda,
/// solved exactly as a linear program over the split beta = b+ - b-.
/// Entries below 1e-9 in magnitude are clipped to zero for the reported
/// support.
DantzigSolution dantzig_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               double lambda);

/// Re-solves the selector across a decreasing penalty grid, warm-starting
/// each step from the previous optimal basis (only the LP bounds depend on
/// lambda). Falls back to a cold solve if a warm step fails.
class DantzigPathSolver {
 public:
  DantzigPathSolver(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

  /// Column l holds the coefficients for grid[l].
  Eigen::MatrixXd path(const std::vector<double>& grid);

  DantzigSolution solve_at(double lambda);

 private:
  Eigen::VectorXd bounds_for(double lambda) const;
  DantzigSolution finish(const SimplexSolution& lp_solution, double lambda) const;

  Eigen::Index p_ = 0;
  Eigen::MatrixXd gram_;       // X'X/n
  Eigen::VectorXd xty_;        // X'y/n
  LinearProgram lp_;
  std::unique_ptr<SimplexTableau> tableau_;
  bool have_basis_ = false;
};

}  // namespace penlab
