#pragma once

#include <vector>

#include "nlhjb/hjb.hpp"

namespace nlhjb {

struct ErgodicOptions {
  /// Decreasing discounts; at least three rungs.
  std::vector<double> ladder{1e-1, 1e-2, 1e-3, 1e-4};
  double tol = 1e-10;
  int max_iterations = 500;
  /// Slack allowed when checking that successive ladder estimates settle.
  double monotone_tol = 1e-9;
};

struct LadderRung {
  double lambda = 0.0;
  double estimate = 0.0;     ///< -lambda w_lambda(0)
  double scaled_sup = 0.0;   ///< lambda |w_lambda|_inf
  double oscillation = 0.0;  ///< |w_lambda - w_lambda(0)|_inf
  int iterations = 0;
  std::vector<int> policy;
};

struct ErgodicResult {
  /// Ergodic constant from average-cost policy iteration seeded by the ladder.
  double c = 0.0;
  /// Richardson value from the two smallest rungs.
  double c_extrapolated = 0.0;
  GridFunction corrector;
  double lambda_used = 0.0;
  double error_estimate = 0.0;
  double residual = 0.0;
  std::vector<LadderRung> rungs;
  std::vector<int> policy;
  /// Stationary occupation of the optimal policy, n x controls, sums to 1.
  Matrix occupation;
};

/**
 * Ergodic constant of c + max_theta { -G^theta w - cost(:, theta) } = 0.
 *
 * Runs solve_discounted along the ladder (warm-started), extrapolates
 * -lambda w_lambda(0) linearly in lambda, then polishes with average-cost
 * policy iteration started from the smallest rung's policy. The corrector is
 * the polished solution normalized to vanish at grid point 0.
 */
ErgodicResult ergodic_constant(const ControlledGenerator& gen, const Matrix& cost,
                               const ErgodicOptions& opts = {});

/// Probability vector mu with mu^T G = 0 for an irreducible generator G.
Vector stationary_distribution(const Matrix& generator);

struct EffectiveSample {
  double x = 0.0;
  double p = 0.0;
  double value = 0.0;
  double error_estimate = 0.0;
  /// Optimal occupation on (cell point, control).
  Matrix occupation;
};

/**
 * Evaluates H(x, p, phi) := c of the cell problem with frozen cost
 *   l^theta(y_j) = L^theta_{y_j} phi(x) + f^theta(x, y_j) p + l^theta(x, y_j),
 * where phi lives on `x_grid` and the cell problem on `cell_grid`.
 */
class EffectiveEvaluator {
 public:
  EffectiveEvaluator(const ControlProblem& problem, TorusGrid x_grid, TorusGrid cell_grid,
                     double delta_ratio = 4.0, ErgodicOptions opts = {});

  const ControlProblem& problem() const { return problem_; }
  const TorusGrid& x_grid() const { return x_grid_; }
  const ControlledGenerator& cell() const { return cell_; }
  const Vector& x_unit_weights() const { return x_unit_; }
  const ErgodicOptions& options() const { return opts_; }

  Matrix frozen_cost(const GridFunction& phi, long x_index, double p) const;
  ErgodicResult cell_problem(const GridFunction& phi, long x_index, double p) const;
  EffectiveSample operator()(const GridFunction& phi, long x_index, double p) const;

 private:
  ControlProblem problem_;
  TorusGrid x_grid_;
  Vector x_unit_;
  ControlledGenerator cell_;
  ErgodicOptions opts_;
};

EffectiveSample effective_hamiltonian(const ControlProblem& problem, const GridFunction& phi,
                                      long x_index, double p, const TorusGrid& cell_grid,
                                      const ErgodicOptions& opts = {});

struct EffectiveOptions {
  double tol = 1e-9;
  int max_iterations = 50;
  double delta_ratio = 4.0;
  ErgodicOptions ergodic;
};

struct EffectiveSolution {
  GridFunction u;
  double residual = 0.0;
  int iterations = 0;
  /// Residual with the gradient upwinded along the averaged drift.
  double upwind_residual = 0.0;
  std::vector<EffectiveSample> samples;
};

/// Centered difference (u(x+h) - u(x-h)) / 2h.
Vector centered_gradient(const Vector& u);

/**
 * Solves u(x) + H(x, Du(x), u) = 0 on `x_grid` with centered Du, by Newton's
 * method on the frozen-occupation linearization
 *   J = I - diag(kbar) U - diag(fbar) D,
 * with step halving on the sup residual.
 */
EffectiveSolution solve_effective(const ControlProblem& problem, const TorusGrid& x_grid,
                                  const TorusGrid& cell_grid, const EffectiveOptions& opts = {});

}  // namespace nlhjb
