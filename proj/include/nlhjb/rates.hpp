#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlhjb/cell.hpp"

namespace nlhjb {

struct RateOptions {
  /// x-grid points per fast period; the cell grid uses the same count.
  int points_per_cell = 8;
  double tol = 1e-10;
  double effective_tol = 1e-9;
  /// a in lambda(eps) = eps^{sigma a / (2 + a)}.
  double schedule_exponent = 0.5;
  double delta_ratio = 4.0;
  double degenerate_threshold = 1e-6;
  /// Record wall-clock times; off keeps reports reproducible byte for byte.
  bool timing = false;
  ErgodicOptions ergodic;
};

struct RateEntry {
  double eps = 0.0;
  double sup_error = 0.0;
  double runtime_seconds = 0.0;
  /// Discount used for the two-scale diagnostic.
  double lambda = 0.0;
  /// sup |u_eps - u_bar - eps^sigma w_lambda(x / eps)| on the common points.
  double corrected_error = 0.0;
  /// Predicted upper bound, when the problem has one.
  std::optional<double> envelope;
};

struct RateReport {
  std::string problem_id;
  std::vector<RateEntry> entries;
  std::optional<double> fitted_slope;
  std::optional<double> fitted_intercept;
  bool degenerate = false;
  std::optional<double> expected_slope;
  std::string case_label;
  /// Cell corrector norms behind the envelope (sup and sup + difference quotient).
  double corrector_sup = 0.0;
  double corrector_c1 = 0.0;

  void write_table(std::ostream& out) const;
  void write_csv(std::ostream& out) const;
};

/// lambda(eps) = eps^{sigma a / (2 + a)}.
double discount_schedule(double eps, double sigma, double a);

/// Least squares on (log eps, log error); non-positive errors are dropped.
std::pair<double, double> fit_rate(const std::vector<std::pair<double, double>>& entries);

/**
 * Solves u_eps for each eps (grid of points_per_cell / eps points) and the
 * effective solution on the same grid, and records the sup error on the grid
 * points of the coarsest eps.
 */
RateReport run_rate_experiment(const ControlProblem& problem, const std::vector<double>& eps_list,
                               const RateOptions& opts = {});

enum class SimpleRateCase {
  zero_drift_fast_cost,  ///< f = 0 and l depends on y only
  fast_data,             ///< f and l depend on y only
};

/// Throws std::invalid_argument when the problem does not fit the case.
void check_simple_rate_case(const ControlProblem& problem, SimpleRateCase which);

RateReport run_simple_rate(const ControlProblem& problem, SimpleRateCase which,
                           const std::vector<double>& eps_list, const RateOptions& opts = {});

struct BoundsRow {
  double lambda = 0.0;
  double scaled_sup = 0.0;       ///< (a) lambda |w|
  double oscillation = 0.0;      ///< (b) |w - w(0)|
  double p_sensitivity = 0.0;    ///< (c) lambda |dw| / |dp|
  double phi_sensitivity = 0.0;  ///< (c) lambda |dw| / |dphi|
  double consistency = 0.0;      ///< (d) |lambda w(0) + H| / lambda
};

struct BoundsTable {
  std::vector<BoundsRow> rows;
  double effective_value = 0.0;
  /// Column names whose value grows by more than 50% from one rung to the next.
  std::vector<std::string> flags;

  void write(std::ostream& out) const;
};

/// sup |phi| + sup |second difference / h^2|.
double phi_proxy_norm(const GridFunction& phi);

BoundsTable discount_bounds_check(const EffectiveEvaluator& eval, const GridFunction& phi,
                                  long x_index, double p, const std::vector<double>& ladder);

}  // namespace nlhjb
