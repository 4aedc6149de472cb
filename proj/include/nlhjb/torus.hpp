#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

namespace nlhjb {

using Vector = Eigen::VectorXd;

/// Uniform grid {j h : 0 <= j < n} on the unit circle, h = 1 / n.
class TorusGrid {
 public:
  explicit TorusGrid(int n) : n_(n) {
    if (n < 8) throw std::invalid_argument("torus grid needs at least 8 points per dimension");
  }

  int size() const { return n_; }
  double spacing() const { return 1.0 / n_; }
  double point(long i) const { return static_cast<double>(wrap(i)) / n_; }

  int wrap(long i) const {
    long r = i % n_;
    return static_cast<int>(r < 0 ? r + n_ : r);
  }

  bool operator==(const TorusGrid& other) const = default;

 private:
  int n_;
};

/// Periodic samples on a TorusGrid.
class GridFunction {
 public:
  GridFunction(TorusGrid grid, Vector values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw std::invalid_argument("grid function size does not match its grid");
    }
    if (!values_.allFinite()) throw std::invalid_argument("grid function values must be finite");
  }

  static GridFunction constant(TorusGrid grid, double value) {
    return {grid, Vector::Constant(grid.size(), value)};
  }

  template <class F>
  static GridFunction sample(TorusGrid grid, F&& f) {
    Vector v(grid.size());
    for (int i = 0; i < grid.size(); ++i) v[i] = f(grid.point(i));
    return {grid, std::move(v)};
  }

  const TorusGrid& grid() const { return grid_; }
  const Vector& values() const { return values_; }
  double operator()(long i) const { return values_[grid_.wrap(i)]; }
  double sup_norm() const { return values_.cwiseAbs().maxCoeff(); }

 private:
  TorusGrid grid_;
  Vector values_;
};

}  // namespace nlhjb
