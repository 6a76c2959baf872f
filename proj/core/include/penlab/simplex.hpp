#pragma once

#include <vector>

#include <Eigen/Dense>

#include "penlab/errors.hpp"

namespace penlab {

/// min cost'x  subject to  constraints * x <= bounds,  x >= 0.
struct LinearProgram {
  Eigen::VectorXd cost;         // length m
  Eigen::MatrixXd constraints;  // k x m
  Eigen::VectorXd bounds;       // length k
};

struct SimplexSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

/// Dense-tableau simplex solver.
///
/// Three entry paths: primal from the slack basis when bounds >= 0, dual from
/// the slack basis when costs >= 0 (no artificials needed), and a two-phase
/// primal otherwise. Pricing is most-negative by default and falls back to
/// Bland's rule after a run of degenerate pivots, which keeps cycling out
/// while avoiding Bland's slow typical-case behaviour. The iteration cap is
/// 50 * (k + m).
class SimplexTableau {
 public:
  explicit SimplexTableau(LinearProgram lp);

  SimplexSolution solve();

  /// Re-solves after replacing the constraint bounds, warm-starting the dual
  /// simplex from the current optimal basis. Requires a prior solve() on a
  /// problem that took the primal or dual slack-basis path; otherwise it
  /// falls back to a cold solve.
  SimplexSolution resolve_with_bounds(const Eigen::VectorXd& new_bounds);

 private:
  void build_plain();
  void build_two_phase();
  void pivot(Eigen::Index row, Eigen::Index col);
  void primal_run(Eigen::Index objective_row);
  void dual_run();
  void check_iteration_budget();
  SimplexSolution extract() const;

  LinearProgram lp_;
  Eigen::Index k_ = 0;  // constraint rows
  Eigen::Index m_ = 0;  // structural variables

  Eigen::MatrixXd tab_;
  std::vector<Eigen::Index> basis_;
  Eigen::Index rhs_col_ = 0;
  Eigen::Index entering_limit_ = 0;  // columns past this never enter (artificials)
  Eigen::Index obj_row_ = 0;
  Eigen::Index phase1_row_ = -1;

  int iterations_ = 0;
  int iteration_cap_ = 0;
  bool solved_clean_ = false;  // slack-basis build, valid for warm re-solve
};

SimplexSolution simplex_solve(const LinearProgram& lp);

}  // namespace penlab
