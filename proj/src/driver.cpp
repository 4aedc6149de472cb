#include "nlhjb/driver.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "nlhjb/cell.hpp"
#include "nlhjb/measure_lp.hpp"
#include "nlhjb/presets.hpp"
#include "nlhjb/rates.hpp"

namespace nlhjb {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

ErgodicOptions ergodic_options(const RunConfig& c) {
  ErgodicOptions o;
  o.ladder = c.ladder;
  o.tol = c.tol;
  return o;
}

long x_index(const RunConfig& c) {
  return std::lround(c.x * c.grid_n) % c.grid_n;
}

/// Collects artifacts; each is written to disk in one go.
class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& body) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body;
    names_.push_back(name);
    paths_.push_back(path.string());
  }

  std::vector<std::string> finish(const RunConfig& c, const std::string& command) {
    std::ostringstream m;
    m << "command " << command << '\n';
    m << "config_hash " << config_hash(c) << '\n';
    for (const auto& n : names_) m << "file " << n << '\n';
    write("manifest.txt", m.str());
    return paths_;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
  std::vector<std::string> paths_;
};

void operator_check(const RunConfig& c, Artifacts& out) {
  const ControlProblem problem = make_problem(c);
  const TorusGrid grid(c.grid_n);
  const double delta = c.delta_ratio * grid.spacing();
  std::ostringstream s;
  s << "problem " << problem.name << '\n';
  s << "grid_n " << c.grid_n << '\n';

  const Vector& unit = periodized_unit_weights(grid, problem.kernel.sigma, delta);
  const Vector ones = Vector::Ones(grid.size());
  s << "constant_image_sup " << fmt(apply_circulant(unit, ones).cwiseAbs().maxCoeff()) << '\n';
  s << "min_offdiag_weight " << fmt(unit.tail(grid.size() - 1).minCoeff()) << '\n';

  const KernelValidation kv = validate_kernel(problem.kernel, 256, c.seed);
  s << "kernel_validation " << (kv.pass ? "pass" : "fail") << " samples " << kv.samples
    << " holder_quotient " << fmt(kv.holder_quotient) << '\n';
  if (kv.witness) {
    s << "witness " << kv.witness->check << " theta " << kv.witness->theta << " value "
      << fmt(kv.witness->value) << '\n';
  }

  // Frozen at y = 0 the kernel is isotropic with scale kappa^{-2/(1+sigma)}.
  s << "# theta k discrete_symbol oracle_symbol relative_error\n";
  const double sigma = problem.kernel.sigma;
  for (int t = 0; t < problem.controls(); ++t) {
    const NonlocalStencil st = build_stencil(problem.kernel, grid, t, 0.0, delta);
    const double kappa = kernel_scale(problem.kernel, t, 0.0);
    const KernelSpec iso = make_isotropic_kernel(1, sigma, std::pow(kappa, -2.0 / (1.0 + sigma)));
    for (int k = 1; k <= 3; ++k) {
      const GridFunction wave = GridFunction::sample(
          grid, [k](double x) { return std::cos(2.0 * std::numbers::pi * k * x); });
      const double discrete = -st.apply(wave, 0);
      const double oracle = spectral_multiplier_oracle(iso, k, 1 << 15);
      s << t << ' ' << k << ' ' << fmt(discrete) << ' ' << fmt(oracle) << ' '
        << fmt(std::abs(discrete - oracle) / oracle) << '\n';
    }
  }

  const GridFunction smooth = GridFunction::sample(grid, [](double x) {
    return std::sin(2.0 * std::numbers::pi * x) + 0.3 * std::cos(6.0 * std::numbers::pi * x);
  });
  const HolderCheck hc = nonlocal_x_holder_check(problem.kernel, grid, smooth,
                                                 0.5 * problem.kernel.holder_alpha, 0, 0.0);
  s << "holder_max_quotient " << fmt(hc.max_quotient) << '\n';
  s << "holder_worst_growth " << fmt(hc.worst_growth) << '\n';
  out.write("operator_check.txt", s.str());
}

void cell(const RunConfig& c, Artifacts& out) {
  const ControlProblem problem = make_problem(c);
  const TorusGrid xg(c.grid_n), cg(c.cell_n);
  const EffectiveEvaluator eval(problem, xg, cg, c.delta_ratio, ergodic_options(c));
  const long i = x_index(c);
  const ErgodicResult r = eval.cell_problem(GridFunction::constant(xg, 0.0), i, c.p);
  std::ostringstream s;
  s << "problem " << problem.name << '\n';
  s << "x " << fmt(xg.point(i)) << "\np " << fmt(c.p) << '\n';
  s << "c " << fmt(r.c) << '\n';
  s << "c_extrapolated " << fmt(r.c_extrapolated) << '\n';
  s << "error_estimate " << fmt(r.error_estimate) << '\n';
  s << "lambda_used " << fmt(r.lambda_used) << '\n';
  s << "residual " << fmt(r.residual) << '\n';
  s << "# lambda estimate scaled_sup oscillation iterations\n";
  for (const LadderRung& rung : r.rungs) {
    s << fmt(rung.lambda) << ' ' << fmt(rung.estimate) << ' ' << fmt(rung.scaled_sup) << ' '
      << fmt(rung.oscillation) << ' ' << rung.iterations << '\n';
  }
  s << "# j y corrector policy\n";
  for (int j = 0; j < cg.size(); ++j) {
    s << j << ' ' << fmt(cg.point(j)) << ' ' << fmt(r.corrector.values()[j]) << ' ' << r.policy[j]
      << '\n';
  }
  out.write("cell.txt", s.str());
}

void effective(const RunConfig& c, Artifacts& out) {
  const ControlProblem problem = make_problem(c);
  const TorusGrid xg(c.grid_n), cg(c.cell_n);
  EffectiveOptions opts;
  opts.tol = c.effective_tol;
  opts.delta_ratio = c.delta_ratio;
  opts.ergodic = ergodic_options(c);
  const EffectiveSolution sol = solve_effective(problem, xg, cg, opts);
  std::ostringstream s;
  s << "problem " << problem.name << '\n';
  s << "residual " << fmt(sol.residual) << '\n';
  s << "upwind_residual " << fmt(sol.upwind_residual) << '\n';
  s << "iterations " << sol.iterations << '\n';
  s << "# i x u_bar\n";
  for (int i = 0; i < xg.size(); ++i) s << i << ' ' << fmt(xg.point(i)) << ' ' << fmt(sol.u.values()[i]) << '\n';
  out.write("effective.txt", s.str());
}

void homogenize(const RunConfig& c, Artifacts& out) {
  const ControlProblem problem = make_problem(c);
  const int k = reciprocal_integer(c.eps);
  const TorusGrid grid(c.points_per_cell * k);
  EpsOptions opts;
  opts.tol = c.tol;
  opts.delta_ratio = c.delta_ratio;
  const DiscountedSolution sol = solve_eps_problem(problem, c.eps, grid, opts);
  std::ostringstream s;
  s << "problem " << problem.name << '\n';
  s << "eps " << fmt(c.eps) << '\n';
  s << "grid_n " << grid.size() << '\n';
  s << "residual " << fmt(sol.residual) << '\n';
  s << "iterations " << sol.iterations << '\n';
  s << "# i x u_eps\n";
  for (int i = 0; i < grid.size(); ++i) s << i << ' ' << fmt(grid.point(i)) << ' ' << fmt(sol.w.values()[i]) << '\n';
  out.write("homogenize.txt", s.str());
}

void rates(const RunConfig& c, Artifacts& out) {
  const ControlProblem problem = make_problem(c);
  RateOptions opts;
  opts.points_per_cell = c.points_per_cell;
  opts.tol = c.tol;
  opts.effective_tol = c.effective_tol;
  opts.schedule_exponent = c.schedule_exponent;
  opts.delta_ratio = c.delta_ratio;
  opts.timing = c.timing;
  opts.ergodic = ergodic_options(c);
  RateReport report;
  if (c.preset == "p3-rate-i") {
    report = run_simple_rate(problem, SimpleRateCase::zero_drift_fast_cost, c.eps_list, opts);
  } else if (c.preset == "p4-rate-ii") {
    report = run_simple_rate(problem, SimpleRateCase::fast_data, c.eps_list, opts);
  } else {
    report = run_rate_experiment(problem, c.eps_list, opts);
  }
  std::ostringstream table, csv;
  report.write_table(table);
  report.write_csv(csv);
  out.write("rates.txt", table.str());
  out.write("rates.csv", csv.str());
}

void lp_verify(const RunConfig& c, Artifacts& out) {
  const ControlProblem problem = make_problem(c);
  const TorusGrid xg(c.grid_n), cg(c.cell_n);
  const EffectiveEvaluator eval(problem, xg, cg, c.delta_ratio, ergodic_options(c));
  const long i = x_index(c);
  const Matrix cost = eval.frozen_cost(GridFunction::constant(xg, 0.0), i, c.p);
  const ErgodicResult er = ergodic_constant(eval.cell(), cost, eval.options());
  const LpErgodicResult lp = lp_ergodic_constant(eval.cell(), cost);
  std::ostringstream s;
  s << "problem " << problem.name << '\n';
  s << "cell_n " << c.cell_n << '\n';
  s << "c_discount " << fmt(er.c) << '\n';
  s << "c_lp " << fmt(lp.c) << '\n';
  s << "abs_difference " << fmt(std::abs(er.c - lp.c)) << '\n';
  s << "pivots " << lp.pivots << '\n';
  out.write("lp_verify.txt", s.str());
  std::ostringstream mu;
  lp.mu_star.write(mu);
  out.write("mu_star.txt", mu.str());
}

void bounds_check(const RunConfig& c, Artifacts& out) {
  const ControlProblem problem = make_problem(c);
  const TorusGrid xg(c.grid_n), cg(c.cell_n);
  const EffectiveEvaluator eval(problem, xg, cg, c.delta_ratio, ergodic_options(c));
  const BoundsTable t =
      discount_bounds_check(eval, GridFunction::constant(xg, 0.0), x_index(c), c.p, c.ladder);
  std::ostringstream s;
  s << "problem " << problem.name << '\n';
  t.write(s);
  out.write("bounds_check.txt", s.str());
}

using Command = std::function<void(const RunConfig&, Artifacts&)>;

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> table = {
      {"operator-check", operator_check}, {"cell", cell},
      {"effective", effective},           {"homogenize", homogenize},
      {"rates", rates},                   {"lp-verify", lp_verify},
      {"bounds-check", bounds_check},
  };
  return table;
}

}  // namespace

ControlProblem make_problem(const RunConfig& config) {
  validate_config(config);
  ControlProblem problem =
      config.preset == "custom"
          ? make_custom_problem(config.sigma, AnisotropyTable::read_file(config.anisotropy_table, 1),
                                DataTable::read_file(config.data_table))
          : make_preset(config.preset, config.sigma);
  if (config.controls != 0 && config.controls != problem.controls()) {
    throw std::invalid_argument("config declares " + std::to_string(config.controls) +
                                " controls but the problem has " +
                                std::to_string(problem.controls()));
  }
  return problem;
}

std::vector<std::string> subcommand_names() {
  return {"operator-check", "cell", "effective", "homogenize", "rates", "lp-verify", "bounds-check"};
}

RunOutcome run_subcommand(const std::string& name, const RunConfig& config) {
  RunOutcome outcome;
  const auto it = commands().find(name);
  if (it == commands().end()) {
    outcome.status = 2;
    outcome.message = "unknown subcommand '" + name + "'";
    return outcome;
  }
  try {
    Artifacts artifacts(config.output_dir);
    it->second(config, artifacts);
    outcome.files = artifacts.finish(config, name);
    outcome.message = name + ": wrote " + std::to_string(outcome.files.size()) + " files to " +
                      config.output_dir;
  } catch (const SolverError& e) {
    outcome.status = 1;
    outcome.message = std::string(e.what()) + " (residual " + fmt(e.residual()) + ")";
  } catch (const std::exception& e) {
    outcome.status = 1;
    outcome.message = e.what();
  }
  return outcome;
}

}  // namespace nlhjb
