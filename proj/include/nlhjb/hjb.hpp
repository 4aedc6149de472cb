#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlhjb/kernels.hpp"
#include "nlhjb/nonlocal.hpp"
#include "nlhjb/torus.hpp"

namespace nlhjb {

/// Data field (x, y, theta) -> value, 1-periodic in x and y.
using FieldFn = std::function<double(double x, double y, int theta)>;

struct ControlProblem {
  std::string name;
  KernelSpec kernel;
  FieldFn drift;
  FieldFn cost;
  double lipschitz_C = 1.0;
  double drift_bound = 0.0;
  double cost_bound = 0.0;

  int controls() const { return kernel.controls; }
};

/// Checks declared constants and, by sampling, periodicity and the stored bounds.
void check_problem(const ControlProblem& problem);

/// Raised when an iterative solve gives up; carries the last residual.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/**
 * Family of generators G^theta on a periodic grid:
 *   (G^theta v)_i = kappa_{i,theta} (U v)_i + f_{i,theta} (upwind D v)_i,
 * where U is a unit circulant stencil. Forward differences are used where the
 * drift is positive and backward ones where it is negative, so every -G^theta
 * has nonpositive off-diagonal entries.
 */
class ControlledGenerator {
 public:
  ControlledGenerator(TorusGrid grid, Vector unit_weights, Matrix scales, Matrix drift = {});

  const TorusGrid& grid() const { return grid_; }
  int size() const { return grid_.size(); }
  int controls() const { return static_cast<int>(scales_.cols()); }
  const Vector& unit_weights() const { return unit_; }
  const Matrix& scales() const { return scales_; }
  const Matrix& drift() const { return drift_; }

  /// (G^theta v)_i for every (i, theta), as an n x controls matrix.
  Matrix apply_all(const Vector& v) const;
  /// Dense G^pi for a policy pi (one control per grid point).
  Matrix assemble(const std::vector<int>& policy) const;

 private:
  TorusGrid grid_;
  Vector unit_;
  Matrix scales_;
  Matrix drift_;
};

/// Generator of the cell problem: kernel frozen at each grid point, no drift.
ControlledGenerator cell_generator(const KernelSpec& spec, const TorusGrid& grid,
                                   double delta_ratio = 4.0);

struct DiscountOptions {
  double tol = 1e-10;
  int max_iterations = 500;
  /// Starting policy; empty means the pointwise cheapest control.
  std::vector<int> initial_policy;
};

struct DiscountedSolution {
  GridFunction w;
  double lambda = 0.0;
  double residual = 0.0;
  int iterations = 0;
  std::vector<int> policy;
  /// w = offset + oscillation, oscillation(0) = 0.
  double offset = 0.0;
  Vector oscillation;
};

/**
 * Solves lambda w + max_theta { -G^theta w - cost(:, theta) } = 0 by Howard
 * policy iteration. `cost` is n x controls.
 */
DiscountedSolution solve_discounted(const ControlledGenerator& gen, const Matrix& cost,
                                    double lambda, const DiscountOptions& opts = {});

/// sup_theta { -L^theta_y phi(x_i) - f^theta(x_i, y) p - l^theta(x_i, y) } and its maximiser.
struct HamiltonianValue {
  double value = 0.0;
  int argmax = 0;
};

HamiltonianValue hamiltonian_eval(const ControlProblem& problem, const GridFunction& phi,
                                  long x_index, double y, double p, double delta_ratio = 4.0);

struct EpsOptions {
  double tol = 1e-10;
  int max_iterations = 500;
  double delta_ratio = 4.0;
};

/// Integer k with eps == 1/k; throws std::invalid_argument otherwise.
int reciprocal_integer(double eps);

/**
 * Oscillatory problem u + max_theta { -L^theta_{x/eps} u - f^theta(x, x/eps) Du
 * - l^theta(x, x/eps) } = 0 on `grid`. eps must be 1/k and the grid must hold
 * a whole number (>= 8) of points per period of the fast variable.
 */
DiscountedSolution solve_eps_problem(const ControlProblem& problem, double eps,
                                     const TorusGrid& grid, const EpsOptions& opts = {});

/// Generator used by solve_eps_problem.
ControlledGenerator eps_generator(const ControlProblem& problem, double eps, const TorusGrid& grid,
                                  double delta_ratio = 4.0);

}  // namespace nlhjb
