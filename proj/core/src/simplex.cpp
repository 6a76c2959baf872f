#include "penlab/simplex.hpp"

#include <cmath>
#include <limits>

namespace penlab {
namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kCostEps = 1e-9;
constexpr double kFeasEps = 1e-9;

}  // namespace

SimplexTableau::SimplexTableau(LinearProgram lp) : lp_(std::move(lp)) {
  k_ = lp_.constraints.rows();
  m_ = lp_.constraints.cols();
  if (k_ < 1 || m_ < 1) throw InvalidArgument("simplex: need at least one row and one variable");
  if (lp_.cost.size() != m_ || lp_.bounds.size() != k_) {
    throw DimensionMismatch("simplex: cost/bounds sizes do not match the constraint matrix");
  }
  if (!lp_.cost.allFinite() || !lp_.bounds.allFinite() || !lp_.constraints.allFinite()) {
    throw InvalidArgument("simplex: non-finite input");
  }
  iteration_cap_ = 50 * static_cast<int>(k_ + m_);
}

void SimplexTableau::build_plain() {
  const Eigen::Index cols = m_ + k_ + 1;
  rhs_col_ = cols - 1;
  entering_limit_ = m_ + k_;
  obj_row_ = k_;
  phase1_row_ = -1;

  tab_ = Eigen::MatrixXd::Zero(k_ + 1, cols);
  tab_.block(0, 0, k_, m_) = lp_.constraints;
  tab_.block(0, m_, k_, k_) = Eigen::MatrixXd::Identity(k_, k_);
  tab_.col(rhs_col_).head(k_) = lp_.bounds;
  tab_.row(obj_row_).head(m_) = lp_.cost;

  basis_.resize(static_cast<std::size_t>(k_));
  for (Eigen::Index i = 0; i < k_; ++i) basis_[static_cast<std::size_t>(i)] = m_ + i;
  solved_clean_ = true;
}

void SimplexTableau::build_two_phase() {
  Eigen::Index n_art = 0;
  for (Eigen::Index i = 0; i < k_; ++i) {
    if (lp_.bounds[i] < 0.0) ++n_art;
  }
  const Eigen::Index art_begin = m_ + k_;
  const Eigen::Index cols = m_ + k_ + n_art + 1;
  rhs_col_ = cols - 1;
  entering_limit_ = art_begin;
  obj_row_ = k_;
  phase1_row_ = k_ + 1;

  tab_ = Eigen::MatrixXd::Zero(k_ + 2, cols);
  tab_.block(0, 0, k_, m_) = lp_.constraints;
  tab_.block(0, m_, k_, k_) = Eigen::MatrixXd::Identity(k_, k_);
  tab_.col(rhs_col_).head(k_) = lp_.bounds;
  tab_.row(obj_row_).head(m_) = lp_.cost;

  basis_.resize(static_cast<std::size_t>(k_));
  Eigen::Index next_art = art_begin;
  for (Eigen::Index i = 0; i < k_; ++i) {
    if (lp_.bounds[i] < 0.0) {
      tab_.row(i).head(rhs_col_ + 1) = -tab_.row(i).head(rhs_col_ + 1);
      tab_(i, next_art) = 1.0;
      basis_[static_cast<std::size_t>(i)] = next_art;
      // reduce the phase-1 cost of this basic artificial
      tab_.row(phase1_row_) -= tab_.row(i);
      tab_(phase1_row_, next_art) = 0.0;
      ++next_art;
    } else {
      basis_[static_cast<std::size_t>(i)] = m_ + i;
    }
  }
  solved_clean_ = false;
}

void SimplexTableau::pivot(Eigen::Index row, Eigen::Index col) {
  tab_.row(row) /= tab_(row, col);
  for (Eigen::Index i = 0; i < tab_.rows(); ++i) {
    if (i == row) continue;
    const double factor = tab_(i, col);
    if (factor != 0.0) tab_.row(i) -= factor * tab_.row(row);
  }
  basis_[static_cast<std::size_t>(row)] = col;
}

void SimplexTableau::check_iteration_budget() {
  if (++iterations_ > iteration_cap_) {
    throw IterationLimit("simplex: iteration cap " + std::to_string(iteration_cap_) +
                         " exceeded");
  }
}

void SimplexTableau::primal_run(Eigen::Index objective_row) {
  bool bland = false;
  int stall = 0;
  double last_objective = std::numeric_limits<double>::infinity();

  for (;;) {
    Eigen::Index enter = -1;
    if (!bland) {
      double most_negative = -kCostEps;
      for (Eigen::Index j = 0; j < entering_limit_; ++j) {
        if (tab_(objective_row, j) < most_negative) {
          most_negative = tab_(objective_row, j);
          enter = j;
        }
      }
    } else {
      for (Eigen::Index j = 0; j < entering_limit_; ++j) {
        if (tab_(objective_row, j) < -kCostEps) {
          enter = j;
          break;
        }
      }
    }
    if (enter < 0) return;  // optimal for this objective

    Eigen::Index leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k_; ++i) {
      const double a = tab_(i, enter);
      if (a > kPivotEps) {
        const double ratio = tab_(i, rhs_col_) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 &&
             (leave < 0 || basis_[static_cast<std::size_t>(i)] <
                               basis_[static_cast<std::size_t>(leave)]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) throw Unbounded("simplex: objective unbounded below");

    pivot(leave, enter);
    check_iteration_budget();

    const double objective = -tab_(objective_row, rhs_col_);
    if (std::abs(objective - last_objective) <= 1e-12 * (1.0 + std::abs(last_objective))) {
      if (++stall > 2 * static_cast<int>(k_ + m_)) bland = true;
    } else {
      stall = 0;
    }
    last_objective = objective;
  }
}

void SimplexTableau::dual_run() {
  bool bland = false;
  int stall = 0;
  double last_objective = std::numeric_limits<double>::infinity();

  for (;;) {
    Eigen::Index leave = -1;
    if (!bland) {
      double most_negative = -kFeasEps;
      for (Eigen::Index i = 0; i < k_; ++i) {
        if (tab_(i, rhs_col_) < most_negative) {
          most_negative = tab_(i, rhs_col_);
          leave = i;
        }
      }
    } else {
      for (Eigen::Index i = 0; i < k_; ++i) {
        if (tab_(i, rhs_col_) < -kFeasEps &&
            (leave < 0 ||
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
        }
      }
    }
    if (leave < 0) return;  // primal feasible, hence optimal

    Eigen::Index enter = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < entering_limit_; ++j) {
      const double a = tab_(leave, j);
      if (a < -kPivotEps) {
        const double ratio = tab_(obj_row_, j) / (-a);
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && (enter < 0 || j < enter))) {
          best_ratio = ratio;
          enter = j;
        }
      }
    }
    if (enter < 0) {
      throw Infeasible("simplex: no feasible point satisfies all bounds");
    }

    pivot(leave, enter);
    check_iteration_budget();

    const double objective = -tab_(obj_row_, rhs_col_);
    if (std::abs(objective - last_objective) <= 1e-12 * (1.0 + std::abs(last_objective))) {
      if (++stall > 2 * static_cast<int>(k_ + m_)) bland = true;
    } else {
      stall = 0;
    }
    last_objective = objective;
  }
}

SimplexSolution SimplexTableau::extract() const {
  SimplexSolution solution;
  solution.x = Eigen::VectorXd::Zero(m_);
  for (Eigen::Index i = 0; i < k_; ++i) {
    const Eigen::Index var = basis_[static_cast<std::size_t>(i)];
    if (var < m_) solution.x[var] = std::max(0.0, tab_(i, rhs_col_));
  }
  solution.objective = lp_.cost.dot(solution.x);
  solution.iterations = iterations_;
  return solution;
}

SimplexSolution SimplexTableau::solve() {
  iterations_ = 0;
  const bool bounds_nonneg = (lp_.bounds.array() >= 0.0).all();
  const bool costs_nonneg = (lp_.cost.array() >= 0.0).all();

  if (bounds_nonneg) {
    build_plain();
    primal_run(obj_row_);
    return extract();
  }
  if (costs_nonneg) {
    build_plain();
    dual_run();
    return extract();
  }

  build_two_phase();
  primal_run(phase1_row_);
  if (-tab_(phase1_row_, rhs_col_) > 1e-7) {
    throw Infeasible("simplex: phase one could not reach feasibility");
  }
  // Pivot out any artificial stuck in the basis at level zero; an all-zero
  // row means the constraint is redundant and can stay as is.
  for (Eigen::Index i = 0; i < k_; ++i) {
    if (basis_[static_cast<std::size_t>(i)] >= entering_limit_) {
      for (Eigen::Index j = 0; j < entering_limit_; ++j) {
        if (std::abs(tab_(i, j)) > kPivotEps) {
          pivot(i, j);
          check_iteration_budget();
          break;
        }
      }
    }
  }
  primal_run(obj_row_);
  return extract();
}

SimplexSolution SimplexTableau::resolve_with_bounds(const Eigen::VectorXd& new_bounds) {
  if (new_bounds.size() != k_) {
    throw DimensionMismatch("simplex: new bounds length does not match constraint rows");
  }
  if (!solved_clean_ || basis_.empty()) {
    lp_.bounds = new_bounds;
    return solve();
  }
  lp_.bounds = new_bounds;

  // Slack column t stores B^{-1} e_t, so B^{-1} b is a linear combination of
  // those columns. Reduced costs are untouched by a bounds change, so the
  // basis stays dual feasible and the dual simplex finishes the job.
  Eigen::VectorXd transformed = Eigen::VectorXd::Zero(k_);
  for (Eigen::Index t = 0; t < k_; ++t) {
    if (new_bounds[t] != 0.0) transformed += new_bounds[t] * tab_.col(m_ + t).head(k_);
  }
  tab_.col(rhs_col_).head(k_) = transformed;

  double basic_cost = 0.0;
  for (Eigen::Index i = 0; i < k_; ++i) {
    const Eigen::Index var = basis_[static_cast<std::size_t>(i)];
    if (var < m_) basic_cost += lp_.cost[var] * transformed[i];
  }
  tab_(obj_row_, rhs_col_) = -basic_cost;

  iterations_ = 0;
  dual_run();
  return extract();
}

SimplexSolution simplex_solve(const LinearProgram& lp) { return SimplexTableau(lp).solve(); }

}  // namespace penlab
