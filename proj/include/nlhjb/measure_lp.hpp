#pragma once

#include <iosfwd>
#include <vector>

#include "nlhjb/cell.hpp"
#include "nlhjb/hjb.hpp"

namespace nlhjb {

/// Largest LP size accepted: cell points times controls.
inline constexpr int max_lp_variables = 512;

/// Weights on (cell point j, control theta) stored as an n x controls matrix.
struct OccupationalMeasure {
  Matrix weights;

  /// Throws unless weights are >= -tol and sum to 1 within tol.
  void validate(double tol = 1e-12) const;
  void write(std::ostream& out) const;
};

/// True when sum mu_{j,theta} (G^theta e_i)_j vanishes for every i (within tol).
bool is_stationary(const ControlledGenerator& gen, const OccupationalMeasure& mu, double tol = 1e-9);

struct LpErgodicResult {
  double c = 0.0;
  OccupationalMeasure mu_star;
  int pivots = 0;
};

/**
 * Ergodic constant as c = -min sum mu l over occupational measures with
 *   mu >= 0, sum mu = 1, sum_{j,theta} mu_{j,theta} (G^theta e_i)_j = 0 for all i.
 */
LpErgodicResult lp_ergodic_constant(const ControlledGenerator& gen, const Matrix& cost);

/// Measure-averaged ingredients on the x-grid.
struct AveragedIngredients {
  double kappa_bar = 0.0;
  NonlocalStencil k_bar;
  Vector f_bar;
  Vector l_bar;
};

AveragedIngredients averaged_ingredients(const ControlProblem& problem,
                                         const OccupationalMeasure& mu,
                                         const TorusGrid& cell_grid, const TorusGrid& x_grid,
                                         double delta_ratio = 4.0);

/// -Lbar phi(x_i) - fbar(x_i) p - lbar(x_i): lower bound for H at (x_i, p, phi).
double averaged_bellman_value(const AveragedIngredients& avg, const GridFunction& phi,
                              long x_index, double p);

struct ConeMembership {
  bool member = false;
  double margin = 0.0;
};

/// Cost family phi (n x controls) belongs to the cone iff its ergodic constant is <= 0.
ConeMembership cone_membership(const ControlledGenerator& gen, const Matrix& phi);

struct MinimaxGap {
  double lp_value = 0.0;
  double sampled_value = 0.0;
  double gap = 0.0;
};

/**
 * Compares the LP value min_mu sum mu l with
 *   sup_{psi in span(psi_samples)} min_{j,theta} (G^theta psi)_j + l_{j,theta},
 * the best bound certified by point-mass measures.
 */
MinimaxGap minimax_gap(const ControlledGenerator& gen, const Matrix& cost,
                       const std::vector<Vector>& psi_samples);

}  // namespace nlhjb
