#pragma once

#include <Eigen/Dense>

namespace nlhjb {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd x;
  double value = 0.0;
  int pivots = 0;
};

/**
 * Dense two-phase tableau simplex for
 *   minimize c^T x  subject to  A x = b,  x >= 0.
 * Bland's rule throughout; rows are scaled to unit max-norm, and redundant
 * equality rows are dropped after phase one.
 */
LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  double tol = 1e-10);

}  // namespace nlhjb
