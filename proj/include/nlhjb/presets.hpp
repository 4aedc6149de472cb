#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nlhjb/hjb.hpp"

namespace nlhjb {

/**
 * Built-in problems (N = 1):
 *   p1-isotropic-linear     isotropic kernel, one control, f = 0, l(x, y)
 *   p2-two-control-constant isotropic kernel, costs 1 and 0.25
 *   p3-rate-i               cosine kernel, f = 0, l^theta(y)
 *   p4-rate-ii              cosine kernel, f^theta(y), l^theta(y)
 *   p5-generic              cosine kernel, f^theta(x, y), l^theta(x, y)
 *   p6-flat                 y-independent kernel and data, f = 0
 */
std::vector<std::string> preset_names();

ControlProblem make_preset(const std::string& name, double sigma = 1.5);

/**
 * Sampled drift and cost on an nx x ny lattice, bilinearly interpolated and
 * periodic in both variables. Rows: `ix iy itheta f l`; '#' starts a comment.
 */
class DataTable {
 public:
  DataTable(int nx, int ny, int controls);

  static DataTable read(std::istream& in);
  static DataTable read_file(const std::string& path);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int controls() const { return controls_; }

  double& drift(int ix, int iy, int theta) { return f_[index(ix, iy, theta)]; }
  double& cost(int ix, int iy, int theta) { return l_[index(ix, iy, theta)]; }

  double drift_at(double x, double y, int theta) const { return interp(f_, x, y, theta); }
  double cost_at(double x, double y, int theta) const { return interp(l_, x, y, theta); }

  double drift_bound() const;
  double cost_bound() const;

 private:
  int index(int ix, int iy, int theta) const { return (ix * ny_ + iy) * controls_ + theta; }
  double interp(const std::vector<double>& v, double x, double y, int theta) const;

  int nx_, ny_, controls_;
  std::vector<double> f_, l_;
};

/// Problem built from an anisotropy table and a data table with matching control counts.
ControlProblem make_custom_problem(double sigma, const AnisotropyTable& anisotropy,
                                   const DataTable& data);

}  // namespace nlhjb
