#include "nlhjb/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlhjb {

void check_problem(const ControlProblem& problem) {
  check_parameters(problem.kernel);
  if (problem.kernel.dim != 1) throw std::invalid_argument("control problems are one-dimensional");
  if (!problem.drift || !problem.cost) throw std::invalid_argument("drift and cost must be set");
  if (!(problem.lipschitz_C > 0.0)) throw std::invalid_argument("Lipschitz constant must be positive");
  if (!(problem.drift_bound >= 0.0) || !(problem.cost_bound >= 0.0)) {
    throw std::invalid_argument("data bounds must be nonnegative");
  }
  constexpr int samples = 12;
  constexpr double tol = 1e-9;
  for (int a = 0; a < samples; ++a) {
    for (int b = 0; b < samples; ++b) {
      const double x = (a + 0.37) / samples;
      const double y = (b + 0.61) / samples;
      for (int t = 0; t < problem.controls(); ++t) {
        for (const FieldFn* fn : {&problem.drift, &problem.cost}) {
          const double v = (*fn)(x, y, t);
          const double bound = fn == &problem.drift ? problem.drift_bound : problem.cost_bound;
          if (!std::isfinite(v) || std::abs(v) > bound + tol) {
            throw std::invalid_argument("problem data exceed their declared bound");
          }
          if (std::abs((*fn)(x + 1.0, y, t) - v) > tol || std::abs((*fn)(x, y + 1.0, t) - v) > tol) {
            throw std::invalid_argument("problem data are not 1-periodic");
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------

ControlledGenerator::ControlledGenerator(TorusGrid grid, Vector unit_weights, Matrix scales,
                                         Matrix drift)
    : grid_(grid), unit_(std::move(unit_weights)), scales_(std::move(scales)),
      drift_(std::move(drift)) {
  const int n = grid_.size();
  if (unit_.size() != n || scales_.rows() != n || scales_.cols() < 1) {
    throw std::invalid_argument("generator dimensions do not match the grid");
  }
  if (drift_.size() == 0) drift_ = Matrix::Zero(n, scales_.cols());
  if (drift_.rows() != n || drift_.cols() != scales_.cols()) {
    throw std::invalid_argument("drift table does not match the generator");
  }
  if ((unit_.array() < 0.0).any() || (scales_.array() < 0.0).any()) {
    throw std::invalid_argument("generator weights must be nonnegative");
  }
}

Matrix ControlledGenerator::apply_all(const Vector& v) const {
  const int n = size();
  const double inv_h = static_cast<double>(n);
  const Vector uv = apply_circulant(unit_, v);
  Matrix out(n, controls());
  for (int i = 0; i < n; ++i) {
    const double fwd = (v[(i + 1) % n] - v[i]) * inv_h;
    const double bwd = (v[i] - v[(i + n - 1) % n]) * inv_h;
    for (int t = 0; t < controls(); ++t) {
      const double f = drift_(i, t);
      out(i, t) = scales_(i, t) * uv[i] + f * (f > 0.0 ? fwd : bwd);
    }
  }
  return out;
}

Matrix ControlledGenerator::assemble(const std::vector<int>& policy) const {
  const int n = size();
  if (static_cast<int>(policy.size()) != n) throw std::invalid_argument("policy size mismatch");
  const double inv_h = static_cast<double>(n);
  Matrix g = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int t = policy[i];
    if (t < 0 || t >= controls()) throw std::invalid_argument("policy control out of range");
    const double kappa = scales_(i, t);
    double diag = 0.0;
    for (int r = 1; r < n; ++r) {
      const double w = kappa * unit_[r];
      g(i, (i + r) % n) += w;
      diag -= w;
    }
    const double f = drift_(i, t);
    if (f > 0.0) {
      g(i, (i + 1) % n) += f * inv_h;
      diag -= f * inv_h;
    } else if (f < 0.0) {
      g(i, (i + n - 1) % n) -= f * inv_h;
      diag += f * inv_h;
    }
    g(i, i) += diag;
  }
  return g;
}

ControlledGenerator cell_generator(const KernelSpec& spec, const TorusGrid& grid,
                                   double delta_ratio) {
  const StencilBank bank = grid_bank(spec, grid, delta_ratio);
  return {grid, bank.unit_weights(), bank.scales()};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<int> greedy_policy(const Matrix& q, const std::vector<int>& current) {
  std::vector<int> next(current);
  for (long i = 0; i < q.rows(); ++i) {
    int best = current[i];
    for (int t = 0; t < q.cols(); ++t) {
      const double margin = 1e-12 * std::max(1.0, std::abs(q(i, best)));
      if (q(i, t) < q(i, best) - margin) best = t;
    }
    next[i] = best;
  }
  return next;
}

std::vector<int> cheapest_controls(const Matrix& cost) {
  std::vector<int> policy(cost.rows());
  for (long i = 0; i < cost.rows(); ++i) {
    Eigen::Index t;
    cost.row(i).minCoeff(&t);
    policy[i] = static_cast<int>(t);
  }
  return policy;
}

// Solves M x = b with one step of iterative refinement.
Vector refined_solve(const Matrix& m, const Vector& b) {
  Eigen::PartialPivLU<Matrix> lu(m);
  Vector x = lu.solve(b);
  x += lu.solve(b - m * x);
  if (!x.allFinite()) throw SolverError("linear solve failed", std::numeric_limits<double>::infinity());
  return x;
}

}  // namespace

DiscountedSolution solve_discounted(const ControlledGenerator& gen, const Matrix& cost,
                                    double lambda, const DiscountOptions& opts) {
  const int n = gen.size();
  if (!(lambda > 0.0)) throw std::invalid_argument("discount must be positive");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (cost.rows() != n || cost.cols() != gen.controls()) {
    throw std::invalid_argument("cost table does not match the generator");
  }
  if (!cost.allFinite()) throw std::invalid_argument("cost must be finite");

  std::vector<int> policy = opts.initial_policy.empty() ? cheapest_controls(cost) : opts.initial_policy;
  if (static_cast<int>(policy.size()) != n) throw std::invalid_argument("initial policy size mismatch");

  double residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iterations; ++it) {
    // Unknowns: offset a = w(0) and oscillation v with v(0) = 0, so w = a + v.
    Matrix m = -gen.assemble(policy);
    m.diagonal().array() += lambda;
    m.col(0).setConstant(lambda);
    Vector rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = cost(i, policy[i]);
    const Vector sol = refined_solve(m, rhs);
    const double offset = sol[0];
    Vector v = sol;
    v[0] = 0.0;

    const Matrix q = gen.apply_all(v) + cost;
    residual = 0.0;
    for (int i = 0; i < n; ++i) {
      residual = std::max(residual, std::abs(lambda * offset + lambda * v[i] - q.row(i).minCoeff()));
    }
    std::vector<int> next = greedy_policy(q, policy);
    if (next == policy) {
      if (residual > opts.tol) {
        throw SolverError("policy iteration stalled above tolerance", residual);
      }
      DiscountedSolution out{GridFunction(gen.grid(), (v.array() + offset).matrix()), lambda, residual, it,
                             std::move(policy), offset, std::move(v)};
      return out;
    }
    policy = std::move(next);
  }
  throw SolverError("policy iteration hit its iteration cap", residual);
}

// ---------------------------------------------------------------------------

HamiltonianValue hamiltonian_eval(const ControlProblem& problem, const GridFunction& phi,
                                  long x_index, double y, double p, double delta_ratio) {
  if (problem.controls() < 1) throw std::invalid_argument("empty control set");
  const TorusGrid& grid = phi.grid();
  const Vector& unit =
      periodized_unit_weights(grid, problem.kernel.sigma, delta_ratio * grid.spacing());
  const double base = apply_circulant(unit, phi.values(), x_index);
  const double x = grid.point(x_index);
  HamiltonianValue best{-std::numeric_limits<double>::infinity(), 0};
  for (int t = 0; t < problem.controls(); ++t) {
    const double value = -kernel_scale(problem.kernel, t, y) * base -
                         problem.drift(x, y, t) * p - problem.cost(x, y, t);
    if (value > best.value) best = {value, t};
  }
  return best;
}

int reciprocal_integer(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("eps must lie in (0, 1]");
  const double inv = 1.0 / eps;
  const long k = std::lround(inv);
  if (std::abs(inv - static_cast<double>(k)) > 1e-9 * inv) {
    throw std::invalid_argument("eps must be the reciprocal of an integer");
  }
  return static_cast<int>(k);
}

ControlledGenerator eps_generator(const ControlProblem& problem, double eps, const TorusGrid& grid,
                                  double delta_ratio) {
  const int k = reciprocal_integer(eps);
  const int n = grid.size();
  if (n % k != 0 || n / k < 8) {
    throw std::invalid_argument("grid must hold a whole number (>= 8) of points per fast period");
  }
  const int ppc = n / k;
  const int controls = problem.controls();
  Matrix per_cell(ppc, controls);
  for (int j = 0; j < ppc; ++j) {
    for (int t = 0; t < controls; ++t) {
      per_cell(j, t) = kernel_scale(problem.kernel, t, static_cast<double>(j) / ppc);
    }
  }
  Matrix scales(n, controls), drift(n, controls);
  for (int i = 0; i < n; ++i) {
    const double x = grid.point(i);
    const double y = static_cast<double>(i % ppc) / ppc;
    for (int t = 0; t < controls; ++t) {
      scales(i, t) = per_cell(i % ppc, t);
      drift(i, t) = problem.drift(x, y, t);
    }
  }
  const Vector& unit = periodized_unit_weights(grid, problem.kernel.sigma, delta_ratio * grid.spacing());
  return {grid, unit, std::move(scales), std::move(drift)};
}

DiscountedSolution solve_eps_problem(const ControlProblem& problem, double eps,
                                     const TorusGrid& grid, const EpsOptions& opts) {
  const ControlledGenerator gen = eps_generator(problem, eps, grid, opts.delta_ratio);
  const int n = grid.size();
  const int ppc = n / reciprocal_integer(eps);
  Matrix cost(n, problem.controls());
  for (int i = 0; i < n; ++i) {
    const double y = static_cast<double>(i % ppc) / ppc;
    for (int t = 0; t < problem.controls(); ++t) cost(i, t) = problem.cost(grid.point(i), y, t);
  }
  DiscountOptions dopts;
  dopts.tol = opts.tol;
  dopts.max_iterations = opts.max_iterations;
  return solve_discounted(gen, cost, 1.0, dopts);
}

}  // namespace nlhjb
