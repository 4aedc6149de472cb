#include "nlhjb/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nlhjb {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Tableau {
  // Constraint rows 0..m-1, objective row m; last column is the right-hand side.
  MatrixXd t;
  std::vector<int> basis;
  int pivots = 0;

  int rows() const { return static_cast<int>(t.rows()) - 1; }
  int rhs() const { return static_cast<int>(t.cols()) - 1; }

  void pivot(int r, int c) {
    t.row(r) /= t(r, c);
    for (int i = 0; i < t.rows(); ++i) {
      if (i != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
    }
    basis[r] = c;
    ++pivots;
  }

  // Bland's rule on columns [0, allowed). Returns false when unbounded.
  bool optimize(int allowed, double tol) {
    const int m = rows();
    for (;;) {
      int enter = -1;
      for (int j = 0; j < allowed; ++j) {
        if (t(m, j) < -tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < m; ++i) {
        if (t(i, enter) <= tol) continue;
        const double ratio = t(i, rhs()) / t(i, enter);
        if (leave < 0 || ratio < best - tol ||
            (std::abs(ratio - best) <= tol && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

  void price(const VectorXd& cost) {
    const int m = rows();
    t.row(m).setZero();
    t.row(m).head(cost.size()) = cost.transpose();
    for (int i = 0; i < m; ++i) {
      const int b = basis[i];
      const double cb = b < cost.size() ? cost[b] : 0.0;
      if (cb != 0.0) t.row(m) -= cb * t.row(i);
    }
  }
};

}  // namespace

LpResult solve_lp(const MatrixXd& A, const VectorXd& b, const VectorXd& c, double tol) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n) throw std::invalid_argument("LP dimensions do not agree");
  if (!A.allFinite() || !b.allFinite() || !c.allFinite()) {
    throw std::invalid_argument("LP data must be finite");
  }

  Tableau tab;
  tab.t = MatrixXd::Zero(m + 1, n + m + 1);
  tab.basis.resize(m);
  for (int i = 0; i < m; ++i) {
    double scale = A.row(i).cwiseAbs().maxCoeff();
    if (scale == 0.0) scale = 1.0;
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    tab.t.row(i).head(n) = sign / scale * A.row(i);
    tab.t(i, n + i) = 1.0;
    tab.t(i, n + m) = sign / scale * b[i];
    tab.basis[i] = n + i;
  }

  // Phase one: minimize the sum of artificials.
  VectorXd phase1 = VectorXd::Zero(n + m);
  phase1.tail(m).setOnes();
  tab.price(phase1);
  tab.optimize(n + m, tol);
  LpResult out;
  if (tab.t(m, n + m) < -1e3 * tol * std::max(1.0, tab.t.col(n + m).head(m).cwiseAbs().maxCoeff())) {
    out.status = LpStatus::infeasible;
    out.pivots = tab.pivots;
    return out;
  }

  // Drive artificials out of the basis; rows where that is impossible are redundant.
  std::vector<int> keep;
  for (int i = 0; i < m; ++i) {
    if (tab.basis[i] >= n) {
      int col = -1;
      for (int j = 0; j < n; ++j) {
        if (std::abs(tab.t(i, j)) > 1e3 * tol) {
          col = j;
          break;
        }
      }
      if (col < 0) continue;
      tab.pivot(i, col);
    }
    keep.push_back(i);
  }
  Tableau reduced;
  reduced.t = MatrixXd::Zero(static_cast<long>(keep.size()) + 1, n + 1);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    reduced.t.row(static_cast<long>(k)).head(n) = tab.t.row(keep[k]).head(n);
    reduced.t(static_cast<long>(k), n) = tab.t(keep[k], n + m);
    reduced.basis.push_back(tab.basis[keep[k]]);
  }
  reduced.pivots = tab.pivots;

  reduced.price(c);
  const bool bounded = reduced.optimize(n, tol);
  out.pivots = reduced.pivots;
  if (!bounded) {
    out.status = LpStatus::unbounded;
    return out;
  }
  out.status = LpStatus::optimal;
  out.x = VectorXd::Zero(n);
  for (std::size_t k = 0; k < reduced.basis.size(); ++k) {
    out.x[reduced.basis[k]] = std::max(0.0, reduced.t(static_cast<long>(k), n));
  }
  out.value = c.dot(out.x);
  return out;
}

}  // namespace nlhjb
