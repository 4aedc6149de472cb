#include "nlhjb/measure_lp.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "nlhjb/simplex.hpp"

namespace nlhjb {

void OccupationalMeasure::validate(double tol) const {
  if (weights.size() == 0) throw std::invalid_argument("empty occupational measure");
  if (!weights.allFinite() || weights.minCoeff() < -tol) {
    throw std::invalid_argument("occupational measure has negative weights");
  }
  if (std::abs(weights.sum() - 1.0) > tol) {
    throw std::invalid_argument("occupational measure does not sum to one");
  }
}

void OccupationalMeasure::write(std::ostream& out) const {
  char buf[96];
  out << "# y_index theta weight\n";
  for (long j = 0; j < weights.rows(); ++j) {
    for (long t = 0; t < weights.cols(); ++t) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.12g\n", j, t, weights(j, t));
      out << buf;
    }
  }
}

namespace {

// Rows: G^theta for every control, stacked so that row j*controls + theta is (G^theta)_{j,:}.
Matrix stacked_generators(const ControlledGenerator& gen) {
  const int n = gen.size();
  const int controls = gen.controls();
  Matrix rows(n * controls, n);
  for (int t = 0; t < controls; ++t) {
    const Matrix g = gen.assemble(std::vector<int>(n, t));
    for (int j = 0; j < n; ++j) rows.row(j * controls + t) = g.row(j);
  }
  return rows;
}

void check_lp_size(const ControlledGenerator& gen) {
  if (gen.size() * gen.controls() > max_lp_variables) {
    throw std::invalid_argument("LP too large: cell points times controls exceeds 512");
  }
}

}  // namespace

bool is_stationary(const ControlledGenerator& gen, const OccupationalMeasure& mu, double tol) {
  if (mu.weights.rows() != gen.size() || mu.weights.cols() != gen.controls()) {
    throw std::invalid_argument("measure does not match the generator");
  }
  const Matrix rows = stacked_generators(gen);
  Vector flat(rows.rows());
  for (int j = 0; j < gen.size(); ++j) {
    for (int t = 0; t < gen.controls(); ++t) flat[j * gen.controls() + t] = mu.weights(j, t);
  }
  const Vector balance = rows.transpose() * flat;
  const double scale = rows.cwiseAbs().maxCoeff();
  return balance.cwiseAbs().maxCoeff() <= tol * std::max(1.0, scale);
}

LpErgodicResult lp_ergodic_constant(const ControlledGenerator& gen, const Matrix& cost) {
  check_lp_size(gen);
  const int n = gen.size();
  const int controls = gen.controls();
  if (cost.rows() != n || cost.cols() != controls) {
    throw std::invalid_argument("cost table does not match the generator");
  }
  const int vars = n * controls;
  Matrix a(n + 1, vars);
  a.topRows(n) = stacked_generators(gen).transpose();
  a.row(n).setOnes();
  Vector b = Vector::Zero(n + 1);
  b[n] = 1.0;
  Vector c(vars);
  for (int j = 0; j < n; ++j) {
    for (int t = 0; t < controls; ++t) c[j * controls + t] = cost(j, t);
  }
  const LpResult lp = solve_lp(a, b, c);
  if (lp.status == LpStatus::infeasible) {
    throw std::logic_error("occupational-measure LP reported infeasible");
  }
  if (lp.status == LpStatus::unbounded) {
    throw std::logic_error("occupational-measure LP reported unbounded");
  }
  LpErgodicResult out;
  out.c = -lp.value;
  out.pivots = lp.pivots;
  out.mu_star.weights.resize(n, controls);
  for (int j = 0; j < n; ++j) {
    for (int t = 0; t < controls; ++t) out.mu_star.weights(j, t) = lp.x[j * controls + t];
  }
  return out;
}

AveragedIngredients averaged_ingredients(const ControlProblem& problem,
                                         const OccupationalMeasure& mu,
                                         const TorusGrid& cell_grid, const TorusGrid& x_grid,
                                         double delta_ratio) {
  if (mu.weights.rows() != cell_grid.size() || mu.weights.cols() != problem.controls()) {
    throw std::invalid_argument("measure does not match the cell grid");
  }
  mu.validate(1e-9);
  double kappa_bar = 0.0;
  Vector f_bar = Vector::Zero(x_grid.size());
  Vector l_bar = Vector::Zero(x_grid.size());
  for (int j = 0; j < cell_grid.size(); ++j) {
    const double y = cell_grid.point(j);
    for (int t = 0; t < problem.controls(); ++t) {
      const double w = mu.weights(j, t);
      if (w == 0.0) continue;
      kappa_bar += w * kernel_scale(problem.kernel, t, y);
      for (int i = 0; i < x_grid.size(); ++i) {
        const double x = x_grid.point(i);
        f_bar[i] += w * problem.drift(x, y, t);
        l_bar[i] += w * problem.cost(x, y, t);
      }
    }
  }
  const double delta = delta_ratio * x_grid.spacing();
  const Vector& unit = periodized_unit_weights(x_grid, problem.kernel.sigma, delta);
  NonlocalStencil k_bar(x_grid, -1, 0.0, kappa_bar * unit,
                        kappa_bar * unit_near_field_coeff(problem.kernel.sigma, delta));
  return {kappa_bar, std::move(k_bar), std::move(f_bar), std::move(l_bar)};
}

double averaged_bellman_value(const AveragedIngredients& avg, const GridFunction& phi,
                              long x_index, double p) {
  const int i = phi.grid().wrap(x_index);
  return -avg.k_bar.apply(phi, i) - avg.f_bar[i] * p - avg.l_bar[i];
}

ConeMembership cone_membership(const ControlledGenerator& gen, const Matrix& phi) {
  const double c = lp_ergodic_constant(gen, phi).c;
  return {c <= 0.0, -c};
}

MinimaxGap minimax_gap(const ControlledGenerator& gen, const Matrix& cost,
                       const std::vector<Vector>& psi_samples) {
  check_lp_size(gen);
  const int n = gen.size();
  const int controls = gen.controls();
  MinimaxGap out;
  out.lp_value = -lp_ergodic_constant(gen, cost).c;

  // max t  s.t.  t - sum_s a_s (G psi_s)_{j,theta} + slack = l_{j,theta},
  // with t = t+ - t-, a_s = a+ - a-; posed as a minimization of -t.
  const Matrix rows = stacked_generators(gen);
  const int samples = static_cast<int>(psi_samples.size());
  const int m = n * controls;
  const int vars = 2 + 2 * samples + m;
  Matrix a = Matrix::Zero(m, vars);
  Vector b(m);
  a.col(0).setOnes();
  a.col(1).setConstant(-1.0);
  for (int s = 0; s < samples; ++s) {
    if (psi_samples[s].size() != n) throw std::invalid_argument("psi sample has the wrong size");
    const Vector g = rows * psi_samples[s];
    a.col(2 + 2 * s) = -g;
    a.col(3 + 2 * s) = g;
  }
  a.rightCols(m).setIdentity();
  for (int j = 0; j < n; ++j) {
    for (int t = 0; t < controls; ++t) b[j * controls + t] = cost(j, t);
  }
  Vector c = Vector::Zero(vars);
  c[0] = -1.0;
  c[1] = 1.0;
  const LpResult lp = solve_lp(a, b, c);
  if (lp.status != LpStatus::optimal) throw std::logic_error("sampled dual LP did not solve");
  out.sampled_value = -lp.value;
  out.gap = out.lp_value - out.sampled_value;
  return out;
}

}  // namespace nlhjb
