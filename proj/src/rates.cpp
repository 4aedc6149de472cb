#include "nlhjb/rates.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace nlhjb {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<int> check_eps_ladder(const std::vector<double>& eps_list) {
  if (eps_list.size() < 3) throw std::invalid_argument("rate experiments need at least three eps values");
  std::vector<int> ks;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    ks.push_back(reciprocal_integer(eps_list[i]));
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) {
      throw std::invalid_argument("eps list must be strictly decreasing");
    }
    if (ks.back() % ks.front() != 0) {
      throw std::invalid_argument("every 1/eps must be a multiple of the first one");
    }
  }
  return ks;
}

}  // namespace

double discount_schedule(double eps, double sigma, double a) {
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("schedule exponent must lie in (0, 1)");
  return std::pow(eps, sigma * a / (2.0 + a));
}

std::pair<double, double> fit_rate(const std::vector<std::pair<double, double>>& entries) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [eps, err] : entries) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (err > 0.0) pts.emplace_back(std::log(eps), std::log(err));
  }
  if (pts.size() < 2) throw std::invalid_argument("fit needs at least two positive errors");
  const double m = static_cast<double>(pts.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit needs at least two distinct eps values");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

RateReport run_rate_experiment(const ControlProblem& problem, const std::vector<double>& eps_list,
                               const RateOptions& opts) {
  const std::vector<int> ks = check_eps_ladder(eps_list);
  const int ppc = opts.points_per_cell;
  if (ppc < 8) throw std::invalid_argument("points per cell must be at least 8");
  const TorusGrid cell_grid(ppc);
  const double sigma = problem.kernel.sigma;

  RateReport report;
  report.problem_id = problem.name;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const auto start = std::chrono::steady_clock::now();
    const double eps = eps_list[e];
    const int k = ks[e];
    const TorusGrid grid(ppc * k);

    EpsOptions eo;
    eo.tol = opts.tol;
    eo.delta_ratio = opts.delta_ratio;
    const DiscountedSolution ueps = solve_eps_problem(problem, eps, grid, eo);

    EffectiveOptions effo;
    effo.tol = opts.effective_tol;
    effo.delta_ratio = opts.delta_ratio;
    effo.ergodic = opts.ergodic;
    const EffectiveSolution ubar = solve_effective(problem, grid, cell_grid, effo);

    RateEntry entry;
    entry.eps = eps;
    entry.lambda = discount_schedule(eps, sigma, opts.schedule_exponent);
    const EffectiveEvaluator eval(problem, grid, cell_grid, opts.delta_ratio, opts.ergodic);
    const Vector du = centered_gradient(ubar.u.values());
    const double scale = std::pow(eps, sigma);
    const int stride = k / ks.front();
    DiscountOptions dopts;
    dopts.tol = opts.tol;
    for (int c = 0; c < ppc * ks.front(); ++c) {
      const int i = c * stride;
      const double diff = ueps.w.values()[i] - ubar.u.values()[i];
      entry.sup_error = std::max(entry.sup_error, std::abs(diff));
      const Matrix cost = eval.frozen_cost(ubar.u, i, du[i]);
      const DiscountedSolution cellsol = solve_discounted(eval.cell(), cost, entry.lambda, dopts);
      entry.corrected_error =
          std::max(entry.corrected_error, std::abs(diff - scale * cellsol.oscillation[i % ppc]));
    }
    if (opts.timing) {
      entry.runtime_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    report.entries.push_back(entry);
  }

  double worst = 0.0;
  std::vector<std::pair<double, double>> pts;
  for (const RateEntry& en : report.entries) {
    worst = std::max(worst, en.sup_error);
    pts.emplace_back(en.eps, en.sup_error);
  }
  report.degenerate = worst <= opts.degenerate_threshold;
  if (!report.degenerate) {
    const auto [slope, intercept] = fit_rate(pts);
    report.fitted_slope = slope;
    report.fitted_intercept = intercept;
  }
  return report;
}

void check_simple_rate_case(const ControlProblem& problem, SimpleRateCase which) {
  constexpr int samples = 16;
  for (int a = 0; a < samples; ++a) {
    for (int b = 0; b < samples; ++b) {
      const double x = (a + 0.3) / samples, y = (b + 0.7) / samples;
      for (int t = 0; t < problem.controls(); ++t) {
        if (which == SimpleRateCase::zero_drift_fast_cost && problem.drift(x, y, t) != 0.0) {
          throw std::invalid_argument("case (i) needs zero drift");
        }
        if (std::abs(problem.cost(x, y, t) - problem.cost(0.0, y, t)) > 1e-12) {
          throw std::invalid_argument("running cost must depend on the fast variable only");
        }
        if (std::abs(problem.drift(x, y, t) - problem.drift(0.0, y, t)) > 1e-12) {
          throw std::invalid_argument("drift must depend on the fast variable only");
        }
      }
    }
  }
}

RateReport run_simple_rate(const ControlProblem& problem, SimpleRateCase which,
                           const std::vector<double>& eps_list, const RateOptions& opts) {
  check_simple_rate_case(problem, which);
  const int ppc = opts.points_per_cell;
  RateReport report = run_rate_experiment(problem, eps_list, opts);

  // Cell corrector at p = 0 with phi = 0: frozen cost is l(y).
  const TorusGrid cell_grid(ppc);
  const ControlledGenerator cell = cell_generator(problem.kernel, cell_grid, opts.delta_ratio);
  Matrix cost(ppc, problem.controls());
  for (int j = 0; j < ppc; ++j) {
    for (int t = 0; t < problem.controls(); ++t) cost(j, t) = problem.cost(0.0, cell_grid.point(j), t);
  }
  const ErgodicResult er = ergodic_constant(cell, cost, opts.ergodic);
  const Vector& w = er.corrector.values();
  double slope_max = 0.0;
  for (int j = 0; j < ppc; ++j) slope_max = std::max(slope_max, std::abs(w[(j + 1) % ppc] - w[j]) * ppc);
  report.corrector_sup = er.corrector.sup_norm();
  report.corrector_c1 = report.corrector_sup + slope_max;

  const double sigma = problem.kernel.sigma;
  if (which == SimpleRateCase::zero_drift_fast_cost) {
    report.case_label = "i";
    report.expected_slope = sigma;
    for (RateEntry& en : report.entries) en.envelope = 2.0 * std::pow(en.eps, sigma) * report.corrector_sup;
  } else {
    report.case_label = "ii";
    report.expected_slope = sigma - 1.0;
    const double c = std::max(1.0, problem.drift_bound);
    for (RateEntry& en : report.entries) {
      en.envelope = 2.0 * c * std::pow(en.eps, sigma - 1.0) * report.corrector_c1;
    }
  }
  return report;
}

void RateReport::write_table(std::ostream& out) const {
  out << "problem " << problem_id << '\n';
  if (!case_label.empty()) out << "case " << case_label << '\n';
  if (expected_slope) out << "expected_slope " << fmt(*expected_slope) << '\n';
  if (degenerate) {
    out << "fitted_slope degenerate\n";
  } else {
    out << "fitted_slope " << fmt(fitted_slope.value_or(0.0)) << '\n';
    out << "fitted_intercept " << fmt(fitted_intercept.value_or(0.0)) << '\n';
  }
  if (!case_label.empty()) {
    out << "corrector_sup " << fmt(corrector_sup) << '\n';
    out << "corrector_c1 " << fmt(corrector_c1) << '\n';
  }
  out << "# eps sup_error lambda corrected_error envelope\n";
  for (const RateEntry& e : entries) {
    out << fmt(e.eps) << ' ' << fmt(e.sup_error) << ' ' << fmt(e.lambda) << ' '
        << fmt(e.corrected_error) << ' ' << (e.envelope ? fmt(*e.envelope) : "-") << '\n';
  }
}

void RateReport::write_csv(std::ostream& out) const {
  out << "eps,sup_error,runtime_seconds\n";
  for (const RateEntry& e : entries) {
    out << fmt(e.eps) << ',' << fmt(e.sup_error) << ',' << fmt(e.runtime_seconds) << '\n';
  }
}

// ---------------------------------------------------------------------------

double phi_proxy_norm(const GridFunction& phi) {
  const Vector& v = phi.values();
  const long n = v.size();
  double second = 0.0;
  for (long i = 0; i < n; ++i) {
    const double d2 = v[(i + 1) % n] - 2.0 * v[i] + v[(i + n - 1) % n];
    second = std::max(second, std::abs(d2) * static_cast<double>(n) * static_cast<double>(n));
  }
  return phi.sup_norm() + second;
}

BoundsTable discount_bounds_check(const EffectiveEvaluator& eval, const GridFunction& phi,
                                  long x_index, double p, const std::vector<double>& ladder) {
  ErgodicOptions eo = eval.options();
  eo.ladder = ladder;
  const Matrix cost = eval.frozen_cost(phi, x_index, p);
  const ErgodicResult er = ergodic_constant(eval.cell(), cost, eo);

  constexpr double dp = 1e-3;
  const Matrix cost_p = eval.frozen_cost(phi, x_index, p + dp);
  const double xi = eval.x_grid().point(x_index);
  const GridFunction bump = GridFunction::sample(
      eval.x_grid(), [xi](double x) { return 1e-3 * std::cos(2.0 * std::numbers::pi * (x - xi)); });
  const GridFunction phi2(eval.x_grid(), phi.values() + bump.values());
  const Matrix cost_phi = eval.frozen_cost(phi2, x_index, p);
  const double bump_norm = phi_proxy_norm(bump);

  BoundsTable table;
  table.effective_value = er.c;
  DiscountOptions dopts;
  dopts.tol = eo.tol;
  dopts.max_iterations = eo.max_iterations;
  for (double lambda : ladder) {
    const DiscountedSolution w = solve_discounted(eval.cell(), cost, lambda, dopts);
    const DiscountedSolution wp = solve_discounted(eval.cell(), cost_p, lambda, dopts);
    const DiscountedSolution wphi = solve_discounted(eval.cell(), cost_phi, lambda, dopts);
    BoundsRow row;
    row.lambda = lambda;
    row.scaled_sup = lambda * w.w.sup_norm();
    row.oscillation = w.oscillation.cwiseAbs().maxCoeff();
    row.p_sensitivity = lambda * (wp.w.values() - w.w.values()).cwiseAbs().maxCoeff() / dp;
    row.phi_sensitivity =
        lambda * (wphi.w.values() - w.w.values()).cwiseAbs().maxCoeff() / bump_norm;
    row.consistency = std::abs(lambda * w.offset + er.c) / lambda;
    table.rows.push_back(row);
  }
  const char* names[] = {"scaled_sup", "oscillation", "p_sensitivity", "phi_sensitivity",
                         "consistency"};
  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    const BoundsRow& a = table.rows[r - 1];
    const BoundsRow& b = table.rows[r];
    const double before[] = {a.scaled_sup, a.oscillation, a.p_sensitivity, a.phi_sensitivity,
                             a.consistency};
    const double after[] = {b.scaled_sup, b.oscillation, b.p_sensitivity, b.phi_sensitivity,
                            b.consistency};
    for (int c = 0; c < 5; ++c) {
      if (after[c] > 1.5 * before[c] + 1e-9) {
        table.flags.push_back(std::string(names[c]) + " at lambda " + fmt(b.lambda));
      }
    }
  }
  return table;
}

void BoundsTable::write(std::ostream& out) const {
  out << "effective_value " << fmt(effective_value) << '\n';
  out << "# lambda scaled_sup oscillation p_sensitivity phi_sensitivity consistency\n";
  for (const BoundsRow& r : rows) {
    out << fmt(r.lambda) << ' ' << fmt(r.scaled_sup) << ' ' << fmt(r.oscillation) << ' '
        << fmt(r.p_sensitivity) << ' ' << fmt(r.phi_sensitivity) << ' ' << fmt(r.consistency)
        << '\n';
  }
  out << "flags " << (flags.empty() ? std::string("none") : std::to_string(flags.size())) << '\n';
  for (const std::string& f : flags) out << "flag " << f << '\n';
}

}  // namespace nlhjb
