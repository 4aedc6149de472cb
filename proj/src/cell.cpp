#include "nlhjb/cell.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlhjb {

Vector stationary_distribution(const Matrix& generator) {
  const long n = generator.rows();
  Matrix m = generator.transpose();
  m.row(0).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs[0] = 1.0;
  Eigen::PartialPivLU<Matrix> lu(m);
  Vector mu = lu.solve(rhs);
  mu += lu.solve(rhs - m * mu);
  if (!mu.allFinite()) throw std::runtime_error("generator has no unique stationary distribution");
  return mu;
}

namespace {

void check_ladder(const std::vector<double>& ladder) {
  if (ladder.size() < 3) throw std::invalid_argument("discount ladder needs at least three rungs");
  for (std::size_t r = 0; r < ladder.size(); ++r) {
    if (!(ladder[r] > 0.0)) throw std::invalid_argument("discounts must be positive");
    if (r > 0 && !(ladder[r] < ladder[r - 1])) {
      throw std::invalid_argument("discount ladder must be strictly decreasing");
    }
  }
}

struct AverageCost {
  double gain;
  Vector relative;
  std::vector<int> policy;
  double residual;
};

// Howard iteration for g = min_theta (G^theta v + cost), v(0) = 0.
AverageCost average_cost_iteration(const ControlledGenerator& gen, const Matrix& cost,
                                   std::vector<int> policy, const ErgodicOptions& opts) {
  const int n = gen.size();
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iterations; ++it) {
    Matrix m = -gen.assemble(policy);
    m.col(0).setOnes();
    Vector rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = cost(i, policy[i]);
    Eigen::PartialPivLU<Matrix> lu(m);
    Vector sol = lu.solve(rhs);
    sol += lu.solve(rhs - m * sol);
    const double gain = sol[0];
    Vector v = sol;
    v[0] = 0.0;
    const Matrix q = gen.apply_all(v) + cost;
    residual = 0.0;
    std::vector<int> next(policy);
    for (int i = 0; i < n; ++i) {
      residual = std::max(residual, std::abs(gain - q.row(i).minCoeff()));
      int best = policy[i];
      for (int t = 0; t < q.cols(); ++t) {
        if (q(i, t) < q(i, best) - 1e-12 * std::max(1.0, std::abs(q(i, best)))) best = t;
      }
      next[i] = best;
    }
    if (next == policy) {
      if (!(residual <= opts.tol)) {
        throw SolverError("average-cost iteration stalled above tolerance", residual);
      }
      return {gain, std::move(v), std::move(policy), residual};
    }
    policy = std::move(next);
  }
  throw SolverError("average-cost iteration hit its iteration cap", residual);
}

}  // namespace

ErgodicResult ergodic_constant(const ControlledGenerator& gen, const Matrix& cost,
                               const ErgodicOptions& opts) {
  check_ladder(opts.ladder);
  std::vector<LadderRung> rungs;
  DiscountOptions dopts;
  dopts.tol = opts.tol;
  dopts.max_iterations = opts.max_iterations;
  for (double lambda : opts.ladder) {
    const DiscountedSolution sol = solve_discounted(gen, cost, lambda, dopts);
    LadderRung rung;
    rung.lambda = lambda;
    rung.estimate = -lambda * sol.offset;
    rung.scaled_sup = lambda * sol.w.sup_norm();
    rung.oscillation = sol.oscillation.cwiseAbs().maxCoeff();
    rung.iterations = sol.iterations;
    rung.policy = sol.policy;
    dopts.initial_policy = sol.policy;
    rungs.push_back(std::move(rung));
  }

  // Linear-in-lambda model: successive differences must shrink.
  for (std::size_t r = 2; r < rungs.size(); ++r) {
    const double prev = std::abs(rungs[r - 1].estimate - rungs[r - 2].estimate);
    const double cur = std::abs(rungs[r].estimate - rungs[r - 1].estimate);
    if (cur > prev + opts.monotone_tol) {
      throw SolverError("vanishing-discount estimates are not settling; discretization may dominate",
                        cur);
    }
  }

  const LadderRung& a = rungs[rungs.size() - 2];
  const LadderRung& b = rungs.back();
  ErgodicResult out{0.0, 0.0, GridFunction::constant(gen.grid(), 0.0), b.lambda, 0.0, 0.0, {}, {}, {}};
  out.c_extrapolated = (a.lambda * b.estimate - b.lambda * a.estimate) / (a.lambda - b.lambda);
  out.error_estimate = std::abs(b.estimate - a.estimate);

  AverageCost avg = average_cost_iteration(gen, cost, b.policy, opts);
  out.c = -avg.gain;
  out.residual = avg.residual;
  out.corrector = GridFunction(gen.grid(), avg.relative);
  out.policy = avg.policy;
  const Vector mu = stationary_distribution(gen.assemble(avg.policy));
  out.occupation = Matrix::Zero(gen.size(), gen.controls());
  for (int i = 0; i < gen.size(); ++i) out.occupation(i, avg.policy[i]) = mu[i];
  out.rungs = std::move(rungs);
  return out;
}

// ---------------------------------------------------------------------------

EffectiveEvaluator::EffectiveEvaluator(const ControlProblem& problem, TorusGrid x_grid,
                                       TorusGrid cell_grid, double delta_ratio,
                                       ErgodicOptions opts)
    : problem_(problem), x_grid_(x_grid),
      x_unit_(periodized_unit_weights(x_grid, problem.kernel.sigma,
                                      delta_ratio * x_grid.spacing())),
      cell_(cell_generator(problem.kernel, cell_grid, delta_ratio)), opts_(std::move(opts)) {
  check_ladder(opts_.ladder);
}

Matrix EffectiveEvaluator::frozen_cost(const GridFunction& phi, long x_index, double p) const {
  if (!(phi.grid() == x_grid_)) throw std::invalid_argument("phi must live on the x-grid");
  const double base = apply_circulant(x_unit_, phi.values(), x_index);
  const double x = x_grid_.point(x_index);
  const TorusGrid& cg = cell_.grid();
  Matrix cost(cg.size(), cell_.controls());
  for (int j = 0; j < cg.size(); ++j) {
    const double y = cg.point(j);
    for (int t = 0; t < cell_.controls(); ++t) {
      cost(j, t) = cell_.scales()(j, t) * base + problem_.drift(x, y, t) * p + problem_.cost(x, y, t);
    }
  }
  return cost;
}

ErgodicResult EffectiveEvaluator::cell_problem(const GridFunction& phi, long x_index,
                                               double p) const {
  return ergodic_constant(cell_, frozen_cost(phi, x_index, p), opts_);
}

EffectiveSample EffectiveEvaluator::operator()(const GridFunction& phi, long x_index,
                                               double p) const {
  ErgodicResult r = cell_problem(phi, x_index, p);
  return {x_grid_.point(x_index), p, r.c, r.error_estimate, std::move(r.occupation)};
}

EffectiveSample effective_hamiltonian(const ControlProblem& problem, const GridFunction& phi,
                                      long x_index, double p, const TorusGrid& cell_grid,
                                      const ErgodicOptions& opts) {
  return EffectiveEvaluator(problem, phi.grid(), cell_grid, 4.0, opts)(phi, x_index, p);
}

// ---------------------------------------------------------------------------

Vector centered_gradient(const Vector& u) {
  const long n = u.size();
  Vector d(n);
  for (long i = 0; i < n; ++i) d[i] = (u[(i + 1) % n] - u[(i + n - 1) % n]) * (0.5 * n);
  return d;
}

namespace {

struct Sweep {
  Vector residual;
  std::vector<EffectiveSample> samples;
};

Sweep sweep(const EffectiveEvaluator& eval, const Vector& u) {
  const GridFunction phi(eval.x_grid(), u);
  const Vector du = centered_gradient(u);
  Sweep s{Vector(u.size()), {}};
  s.samples.reserve(u.size());
  for (long i = 0; i < u.size(); ++i) {
    s.samples.push_back(eval(phi, i, du[i]));
    s.residual[i] = u[i] + s.samples.back().value;
  }
  return s;
}

}  // namespace

EffectiveSolution solve_effective(const ControlProblem& problem, const TorusGrid& x_grid,
                                  const TorusGrid& cell_grid, const EffectiveOptions& opts) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const EffectiveEvaluator eval(problem, x_grid, cell_grid, opts.delta_ratio, opts.ergodic);
  const int n = x_grid.size();
  const ControlledGenerator& cell = eval.cell();
  const TorusGrid& cg = cell.grid();

  Vector u = Vector::Zero(n);
  Sweep cur = sweep(eval, u);
  double res = cur.residual.cwiseAbs().maxCoeff();
  int it = 0;
  while (res > opts.tol) {
    if (++it > opts.max_iterations) {
      throw SolverError("effective equation did not reach tolerance", res);
    }
    // dH/du = -kbar U_i - fbar D_i with the optimal occupation held fixed.
    Matrix jac = Matrix::Identity(n, n);
    const Vector& unit = eval.x_unit_weights();
    for (int i = 0; i < n; ++i) {
      const Matrix& occ = cur.samples[i].occupation;
      double kbar = 0.0, fbar = 0.0;
      for (int j = 0; j < cg.size(); ++j) {
        for (int t = 0; t < cell.controls(); ++t) {
          if (occ(j, t) == 0.0) continue;
          kbar += occ(j, t) * cell.scales()(j, t);
          fbar += occ(j, t) * problem.drift(x_grid.point(i), cg.point(j), t);
        }
      }
      for (int r = 1; r < n; ++r) {
        jac(i, (i + r) % n) -= kbar * unit[r];
        jac(i, i) += kbar * unit[r];
      }
      jac(i, (i + 1) % n) -= fbar * 0.5 * n;
      jac(i, (i + n - 1) % n) += fbar * 0.5 * n;
    }
    const Vector step = jac.partialPivLu().solve(-cur.residual);
    double t = 1.0;
    for (;;) {
      Vector trial = u + t * step;
      Sweep next = sweep(eval, trial);
      const double trial_res = next.residual.cwiseAbs().maxCoeff();
      if (trial_res < (1.0 - 1e-4 * t) * res) {
        u = std::move(trial);
        cur = std::move(next);
        res = trial_res;
        break;
      }
      t *= 0.5;
      if (t < 1e-6) throw SolverError("effective Newton line search failed", res);
    }
  }

  EffectiveSolution out{GridFunction(x_grid, u), res, it, 0.0, std::move(cur.samples)};
  // Diagnostic: same equation with Du upwinded along the averaged drift.
  const GridFunction phi(x_grid, u);
  for (int i = 0; i < n; ++i) {
    const Matrix& occ = out.samples[i].occupation;
    double fbar = 0.0;
    for (int j = 0; j < cg.size(); ++j) {
      for (int t = 0; t < cell.controls(); ++t) {
        fbar += occ(j, t) * problem.drift(x_grid.point(i), cg.point(j), t);
      }
    }
    const double du = fbar > 0.0 ? (u[(i + 1) % n] - u[i]) * n : (u[i] - u[(i + n - 1) % n]) * n;
    out.upwind_residual = std::max(out.upwind_residual, std::abs(u[i] + eval(phi, i, du).value));
  }
  return out;
}

}  // namespace nlhjb
