#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nlhjb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Anisotropy field A(y, zhat, theta): symmetric N x N matrix, 1-periodic in y.
using AnisotropyFn =
    std::function<Matrix(const Vector& y, const Vector& zhat, int theta)>;

/**
 * Homogeneous kernel family K(y, z) = |z^T A(y, zhat) z|^{-(N + sigma) / 2}.
 *
 * The ellipticity constants gamma <= Gamma bound the spectrum of A to
 * [Gamma^{-2/(N+sigma)}, gamma^{-2/(N+sigma)}], which in turn sandwiches the
 * kernel between gamma |z|^{-(N+sigma)} and Gamma |z|^{-(N+sigma)}.
 */
struct KernelSpec {
  int dim = 1;
  double sigma = 1.5;
  int controls = 1;
  AnisotropyFn anisotropy;
  double gamma = 1.0;
  double Gamma = 1.0;
  double holder_alpha = 1.0;
  std::string name;
  /// Set when A is a constant multiple of the identity (same for all y, theta).
  std::optional<double> isotropic_scale;

  double order() const { return dim + sigma; }
  double eigen_lower() const;
  double eigen_upper() const;
};

/// Checks the scalar parameters (dim, sigma, gamma, Gamma, holder_alpha, controls).
/// Throws std::invalid_argument.
void check_parameters(const KernelSpec& spec);

/// A == t * I for every (y, zhat, theta). gamma = Gamma = t^{-(N+sigma)/2}.
KernelSpec make_isotropic_kernel(int dim, double sigma, double scale = 1.0,
                                 int controls = 1);

/**
 * A(y, zhat, theta) = s_theta (I + amp cos(2 pi (y_1 + shift_theta)) zhat zhat^T).
 *
 * Eigenvalues lie in [s_min (1 - |amp|), s_max (1 + |amp|)]; gamma and Gamma
 * are set from those extremes.
 */
KernelSpec make_cosine_kernel(int dim, double sigma, std::vector<double> scales,
                              double amp, std::vector<double> shifts);

/**
 * Tabulated anisotropy on a (y-grid x zhat-sample x theta) lattice with
 * multilinear periodic interpolation.
 *
 * Text format: one row per lattice node,
 *   `iy iz itheta a_11 a_12 ... a_NN`
 * with the N(N+1)/2 upper-triangle entries in row-major order. `iy` is the
 * flat row-major index into the ny^N y-grid. zhat samples cover the half
 * sphere: for N = 1 there is a single sample, for N = 2 sample iz is the
 * direction at angle pi * iz / nz. Evenness in zhat holds by construction.
 * Lines starting with '#' are ignored.
 */
class AnisotropyTable {
 public:
  AnisotropyTable(int dim, int ny, int nz, int controls);

  static AnisotropyTable read(std::istream& in, int dim);
  static AnisotropyTable read_file(const std::string& path, int dim);
  void write(std::ostream& out) const;

  int dim() const { return dim_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  int controls() const { return controls_; }

  Matrix& at(int iy, int iz, int theta);
  const Matrix& at(int iy, int iz, int theta) const;

  Matrix eval(const Vector& y, const Vector& zhat, int theta) const;

  /// Smallest and largest eigenvalue over all stored nodes.
  std::pair<double, double> spectrum_bounds() const;

 private:
  int dim_, ny_, nz_, controls_;
  std::vector<Matrix> nodes_;
};

KernelSpec make_table_kernel(double sigma, const AnisotropyTable& table);

/// K^theta(y, z). Throws std::domain_error for z == 0 and std::invalid_argument
/// when z^T A z leaves the ellipticity band.
double kernel_eval(const KernelSpec& spec, int theta, const Vector& y,
                   const Vector& z);

/// Convenience for N = 1.
double kernel_eval(const KernelSpec& spec, int theta, double y, double z);

struct KernelWitness {
  std::string check;
  Vector y;
  Vector zhat;
  int theta = 0;
  double value = 0.0;
};

struct KernelValidation {
  bool pass = true;
  int samples = 0;
  std::optional<KernelWitness> witness;
  /// Largest |A(y1) - A(y2)| / |y1 - y2|^alpha seen over nearby pairs.
  double holder_quotient = 0.0;
};

KernelValidation validate_kernel(const KernelSpec& spec, int sample_count,
                                 std::uint64_t seed = 20240607);

}  // namespace nlhjb
