#pragma once

#include <vector>

#include "nlhjb/kernels.hpp"
#include "nlhjb/torus.hpp"

namespace nlhjb {

struct StencilOptions {
  /// Lattice images are summed until one more pair changes a weight by less than this.
  double lattice_tol = 1e-10;
  long max_lattice_terms = 50'000'000;
};

/// Default near-field radius: four grid spacings.
inline double default_delta(const TorusGrid& grid) { return 4.0 * grid.spacing(); }

/**
 * Circulant weights of the periodized unit kernel |z|^{-(1+sigma)} on `grid`.
 *
 * Entry r (0 < r < n) is the weight of grid offset r (mod n); entry 0 is zero.
 * The whole-line scheme integrates the kernel exactly against the quadratic
 * profile z^2 on every cell [m - 1/2, m + 1/2] h outside the near-field radius,
 * and folds the near field int_0^delta z^{1-sigma} dz into offsets +-1 as a
 * second difference. Periodization sums the whole-line weights over the
 * lattice images m + j n. Results are cached per (n, sigma, delta, tol).
 */
const Vector& periodized_unit_weights(const TorusGrid& grid, double sigma, double delta,
                                      const StencilOptions& opts = {});

/// Near-field coefficient of the unit kernel: int_0^delta z^{1-sigma} dz.
double unit_near_field_coeff(double sigma, double delta);

/// K^theta(y, +1) for N = 1; the kernel is even, so also K^theta(y, -1).
double kernel_scale(const KernelSpec& spec, int theta, double y);

/**
 * Discrete L^theta_y on a periodic grid with the kernel frozen at y:
 *   (L phi)(x_i) = sum_{m != 0} w_m [phi(x_i + m h) - phi(x_i)].
 */
class NonlocalStencil {
 public:
  NonlocalStencil(TorusGrid grid, int theta, double y, Vector offdiag, double near_field_coeff);

  const TorusGrid& grid() const { return grid_; }
  int theta() const { return theta_; }
  double y() const { return y_; }

  /// Indexed by offset mod n; entry 0 is zero.
  const Vector& offdiag_weights() const { return offdiag_; }
  double weight(long offset) const { return offdiag_[grid_.wrap(offset)]; }
  double diag_weight() const { return diag_; }
  /// Coefficient of (phi(x+h) - 2 phi(x) + phi(x-h)) / h^2; already part of w_{+-1}.
  double near_field_coeff() const { return near_field_coeff_; }

  double apply(const GridFunction& phi, long i) const;
  Vector apply(const Vector& values) const;
  Matrix dense() const;

  NonlocalStencil scaled(double factor) const;

 private:
  TorusGrid grid_;
  int theta_;
  double y_;
  Vector offdiag_;
  double diag_;
  double near_field_coeff_;
};

NonlocalStencil build_stencil(const KernelSpec& spec, const TorusGrid& grid, int theta, double y,
                              double delta, const StencilOptions& opts = {});

inline NonlocalStencil build_stencil(const KernelSpec& spec, const TorusGrid& grid, int theta,
                                     double y) {
  return build_stencil(spec, grid, theta, y, default_delta(grid));
}

double apply_nonlocal(const NonlocalStencil& stencil, const GridFunction& phi, long x_index);

/// Applies unit circulant weights: out_i = sum_r w_r (v_{i+r} - v_i).
Vector apply_circulant(const Vector& weights, const Vector& values);
double apply_circulant(const Vector& weights, const Vector& values, long i);

/**
 * Reference Fourier multiplier m(k) = 2 int_0^{1/2} (1 - cos 2 pi k z) K_per(z) dz
 * of an isotropic, y-independent kernel, by dense composite quadrature.
 * Shares no code with the stencil builder. Throws for non-isotropic specs.
 */
double spectral_multiplier_oracle(const KernelSpec& spec, int k, int oracle_nodes);

/**
 * Precomputed stencils for the kernel frozen at a list of points y_j, acting on
 * `grid`. In one dimension every frozen kernel is kappa(y_j, theta) times the
 * unit kernel, so a bank stores one unit profile plus the kappa table.
 */
class StencilBank {
 public:
  StencilBank(const KernelSpec& spec, TorusGrid grid, std::vector<double> frozen_y,
              double delta_ratio = 4.0, const StencilOptions& opts = {});

  const TorusGrid& grid() const { return grid_; }
  int controls() const { return static_cast<int>(scales_.cols()); }
  int frozen_count() const { return static_cast<int>(scales_.rows()); }
  double frozen_y(int j) const { return frozen_y_[j]; }
  double scale(int j, int theta) const { return scales_(j, theta); }
  const Matrix& scales() const { return scales_; }
  const Vector& unit_weights() const { return unit_; }
  double unit_near_field() const { return unit_near_; }

  NonlocalStencil stencil(int j, int theta) const;

 private:
  TorusGrid grid_;
  std::vector<double> frozen_y_;
  Matrix scales_;
  Vector unit_;
  double unit_near_;
};

/// Frozen points equal to the grid points themselves (cell-problem layout).
StencilBank grid_bank(const KernelSpec& spec, const TorusGrid& grid, double delta_ratio = 4.0);

struct HolderCheck {
  std::vector<int> separations;     ///< grid steps, coarse to fine
  std::vector<double> quotients;    ///< running max of the quotient down to each level
  double max_quotient = 0.0;
  double worst_growth = 0.0;        ///< max relative increase between consecutive levels
};

HolderCheck nonlocal_x_holder_check(const KernelSpec& spec, const TorusGrid& grid,
                                    const GridFunction& phi, double alpha_prime, int theta = 0,
                                    double y = 0.0, int levels = 4);

}  // namespace nlhjb
