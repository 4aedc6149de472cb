#include "nlhjb/kernels.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace nlhjb {

namespace {

constexpr double kRelTol = 1e-12;

double wrap_unit(double v) {
  double r = v - std::floor(v);
  return r >= 1.0 ? 0.0 : r;
}

Vector unit_vector(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  if (dim == 1) {
    return Vector::Constant(1, std::uniform_int_distribution<int>(0, 1)(rng) ? 1.0 : -1.0);
  }
  Vector v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  } while (v.norm() < 1e-8);
  return v / v.norm();
}

}  // namespace

double KernelSpec::eigen_lower() const { return std::pow(Gamma, -2.0 / order()); }
double KernelSpec::eigen_upper() const { return std::pow(gamma, -2.0 / order()); }

void check_parameters(const KernelSpec& spec) {
  if (spec.dim < 1 || spec.dim > 2) {
    throw std::invalid_argument("kernel dimension must be 1 or 2");
  }
  if (!(spec.sigma > 1.0 && spec.sigma < 2.0)) {
    throw std::invalid_argument("sigma must lie in (1, 2)");
  }
  if (!(spec.gamma > 0.0) || !(spec.gamma <= spec.Gamma * (1.0 + kRelTol))) {
    throw std::invalid_argument("ellipticity constants need 0 < gamma <= Gamma");
  }
  if (!(spec.holder_alpha > 0.0 && spec.holder_alpha <= 1.0)) {
    throw std::invalid_argument("holder_alpha must lie in (0, 1]");
  }
  if (spec.controls < 1) {
    throw std::invalid_argument("at least one control is required");
  }
  if (!spec.anisotropy) {
    throw std::invalid_argument("kernel has no anisotropy map");
  }
}

KernelSpec make_isotropic_kernel(int dim, double sigma, double scale, int controls) {
  if (!(scale > 0.0)) throw std::invalid_argument("isotropic scale must be positive");
  KernelSpec spec;
  spec.dim = dim;
  spec.sigma = sigma;
  spec.controls = controls;
  spec.anisotropy = [dim, scale](const Vector&, const Vector&, int) -> Matrix {
    return scale * Matrix::Identity(dim, dim);
  };
  spec.gamma = spec.Gamma = std::pow(scale, -(dim + sigma) / 2.0);
  spec.name = "isotropic";
  spec.isotropic_scale = scale;
  check_parameters(spec);
  return spec;
}

KernelSpec make_cosine_kernel(int dim, double sigma, std::vector<double> scales,
                              double amp, std::vector<double> shifts) {
  if (scales.empty()) throw std::invalid_argument("cosine kernel needs at least one scale");
  if (shifts.size() != scales.size()) {
    throw std::invalid_argument("cosine kernel needs one shift per control");
  }
  if (!(std::abs(amp) < 1.0)) throw std::invalid_argument("cosine amplitude must satisfy |amp| < 1");
  double smin = scales.front(), smax = scales.front();
  for (double s : scales) {
    if (!(s > 0.0)) throw std::invalid_argument("cosine kernel scales must be positive");
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  KernelSpec spec;
  spec.dim = dim;
  spec.sigma = sigma;
  spec.controls = static_cast<int>(scales.size());
  spec.anisotropy = [dim, scales, amp, shifts](const Vector& y, const Vector& zhat,
                                                int theta) -> Matrix {
    const double c = std::cos(2.0 * std::numbers::pi * (y[0] + shifts[theta]));
    Matrix a = Matrix::Identity(dim, dim) + amp * c * zhat * zhat.transpose();
    return scales[theta] * a;
  };
  const double lo = smin * (1.0 - std::abs(amp));
  const double hi = smax * (1.0 + std::abs(amp));
  spec.Gamma = std::pow(lo, -(dim + sigma) / 2.0);
  spec.gamma = std::pow(hi, -(dim + sigma) / 2.0);
  spec.name = "cosine";
  check_parameters(spec);
  return spec;
}

// ---------------------------------------------------------------------------

AnisotropyTable::AnisotropyTable(int dim, int ny, int nz, int controls)
    : dim_(dim), ny_(ny), nz_(nz), controls_(controls) {
  if (dim < 1 || dim > 2) throw std::invalid_argument("table dimension must be 1 or 2");
  if (ny < 1 || nz < 1 || controls < 1) throw std::invalid_argument("table sizes must be positive");
  if (dim == 1 && nz != 1) throw std::invalid_argument("a 1-d table has exactly one zhat sample");
  const int ycount = dim == 1 ? ny : ny * ny;
  nodes_.assign(static_cast<std::size_t>(ycount) * nz * controls, Matrix::Zero(dim, dim));
}

Matrix& AnisotropyTable::at(int iy, int iz, int theta) {
  return nodes_[(static_cast<std::size_t>(iy) * nz_ + iz) * controls_ + theta];
}

const Matrix& AnisotropyTable::at(int iy, int iz, int theta) const {
  return nodes_[(static_cast<std::size_t>(iy) * nz_ + iz) * controls_ + theta];
}

AnisotropyTable AnisotropyTable::read(std::istream& in, int dim) {
  struct Row {
    int iy, iz, theta;
    std::vector<double> entries;
    int line;
  };
  const int nentries = dim * (dim + 1) / 2;
  std::vector<Row> rows;
  std::string line;
  int lineno = 0;
  int max_iy = -1, max_iz = -1, max_theta = -1;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    Row row{0, 0, 0, {}, lineno};
    if (!(ss >> row.iy)) continue;
    if (!(ss >> row.iz >> row.theta)) {
      throw std::invalid_argument("anisotropy table line " + std::to_string(lineno) +
                                  ": expected `iy iz itheta` indices");
    }
    double v;
    while (ss >> v) row.entries.push_back(v);
    if (!ss.eof()) {
      throw std::invalid_argument("anisotropy table line " + std::to_string(lineno) +
                                  ": non-numeric entry");
    }
    if (static_cast<int>(row.entries.size()) != nentries || row.iy < 0 || row.iz < 0 ||
        row.theta < 0) {
      throw std::invalid_argument("anisotropy table line " + std::to_string(lineno) +
                                  ": expected " + std::to_string(nentries) +
                                  " matrix entries and nonnegative indices");
    }
    max_iy = std::max(max_iy, row.iy);
    max_iz = std::max(max_iz, row.iz);
    max_theta = std::max(max_theta, row.theta);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("anisotropy table is empty");
  int ny = max_iy + 1;
  if (dim == 2) {
    ny = static_cast<int>(std::lround(std::sqrt(static_cast<double>(max_iy + 1))));
    if (ny * ny != max_iy + 1) {
      throw std::invalid_argument("anisotropy table: 2-d y-grid must be square");
    }
  }
  AnisotropyTable table(dim, ny, max_iz + 1, max_theta + 1);
  std::vector<char> seen(table.nodes_.size(), 0);
  for (const auto& row : rows) {
    const std::size_t idx =
        (static_cast<std::size_t>(row.iy) * table.nz_ + row.iz) * table.controls_ + row.theta;
    if (seen[idx]) {
      throw std::invalid_argument("anisotropy table line " + std::to_string(row.line) +
                                  ": duplicate node");
    }
    seen[idx] = 1;
    Matrix& a = table.nodes_[idx];
    int k = 0;
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) {
        a(i, j) = a(j, i) = row.entries[k++];
      }
    }
  }
  for (char s : seen) {
    if (!s) throw std::invalid_argument("anisotropy table: missing lattice node");
  }
  return table;
}

AnisotropyTable AnisotropyTable::read_file(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open anisotropy table " + path);
  return read(in, dim);
}

void AnisotropyTable::write(std::ostream& out) const {
  out << "# iy iz itheta upper-triangle entries\n";
  const int ycount = dim_ == 1 ? ny_ : ny_ * ny_;
  char buf[64];
  for (int iy = 0; iy < ycount; ++iy) {
    for (int iz = 0; iz < nz_; ++iz) {
      for (int t = 0; t < controls_; ++t) {
        out << iy << ' ' << iz << ' ' << t;
        const Matrix& a = at(iy, iz, t);
        for (int i = 0; i < dim_; ++i) {
          for (int j = i; j < dim_; ++j) {
            std::snprintf(buf, sizeof buf, " %.17g", a(i, j));
            out << buf;
          }
        }
        out << '\n';
      }
    }
  }
}

Matrix AnisotropyTable::eval(const Vector& y, const Vector& zhat, int theta) const {
  if (theta < 0 || theta >= controls_) throw std::out_of_range("control index out of range");
  // Periodic linear weights along each y axis.
  auto axis = [this](double v, int& i0, int& i1, double& t) {
    const double s = wrap_unit(v) * ny_;
    i0 = static_cast<int>(std::floor(s)) % ny_;
    i1 = (i0 + 1) % ny_;
    t = s - std::floor(s);
  };
  int z0 = 0, z1 = 0;
  double tz = 0.0;
  if (dim_ == 2 && nz_ > 1) {
    double ang = std::atan2(zhat[1], zhat[0]);
    ang -= std::numbers::pi * std::floor(ang / std::numbers::pi);
    const double s = ang / std::numbers::pi * nz_;
    z0 = static_cast<int>(std::floor(s)) % nz_;
    z1 = (z0 + 1) % nz_;
    tz = s - std::floor(s);
  }
  auto yblend = [&](int iz) -> Matrix {
    if (dim_ == 1) {
      int i0, i1;
      double t;
      axis(y[0], i0, i1, t);
      return (1.0 - t) * at(i0, iz, theta) + t * at(i1, iz, theta);
    }
    int a0, a1, b0, b1;
    double ta, tb;
    axis(y[0], a0, a1, ta);
    axis(y[1], b0, b1, tb);
    return (1 - ta) * (1 - tb) * at(a0 * ny_ + b0, iz, theta) +
           ta * (1 - tb) * at(a1 * ny_ + b0, iz, theta) +
           (1 - ta) * tb * at(a0 * ny_ + b1, iz, theta) + ta * tb * at(a1 * ny_ + b1, iz, theta);
  };
  if (z0 == z1) return yblend(z0);
  return (1.0 - tz) * yblend(z0) + tz * yblend(z1);
}

std::pair<double, double> AnisotropyTable::spectrum_bounds() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Matrix& a : nodes_) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  }
  return {lo, hi};
}

KernelSpec make_table_kernel(double sigma, const AnisotropyTable& table) {
  auto [lo, hi] = table.spectrum_bounds();
  if (!(lo > 0.0)) throw std::invalid_argument("anisotropy table is not positive definite");
  KernelSpec spec;
  spec.dim = table.dim();
  spec.sigma = sigma;
  spec.controls = table.controls();
  spec.anisotropy = [table](const Vector& y, const Vector& zhat, int theta) {
    return table.eval(y, zhat, theta);
  };
  // Interpolation is a convex combination, so node extremes bound every value.
  spec.Gamma = std::pow(lo, -(spec.dim + sigma) / 2.0);
  spec.gamma = std::pow(hi, -(spec.dim + sigma) / 2.0);
  spec.holder_alpha = 1.0;
  spec.name = "table";
  check_parameters(spec);
  return spec;
}

// ---------------------------------------------------------------------------

double kernel_eval(const KernelSpec& spec, int theta, const Vector& y, const Vector& z) {
  if (z.size() != spec.dim || y.size() != spec.dim) {
    throw std::invalid_argument("kernel_eval: point dimension mismatch");
  }
  if (theta < 0 || theta >= spec.controls) throw std::out_of_range("control index out of range");
  const double r = z.norm();
  if (r == 0.0) throw std::domain_error("kernel is singular at z = 0");
  const Vector zhat = z / r;
  const Matrix a = spec.anisotropy(y, zhat, theta);
  const double q = z.dot(a * z);
  const double r2 = r * r;
  if (q < spec.eigen_lower() * r2 * (1.0 - 1e-10) || q > spec.eigen_upper() * r2 * (1.0 + 1e-10)) {
    throw std::invalid_argument("anisotropy violates the ellipticity band");
  }
  return std::pow(std::abs(q), -spec.order() / 2.0);
}

double kernel_eval(const KernelSpec& spec, int theta, double y, double z) {
  return kernel_eval(spec, theta, Vector::Constant(1, y), Vector::Constant(1, z));
}

KernelValidation validate_kernel(const KernelSpec& spec, int sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw std::invalid_argument("sample_count must be at least 1");
  check_parameters(spec);
  KernelValidation report;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, spec.controls - 1);
  const int n = spec.dim;
  const double lo = spec.eigen_lower(), hi = spec.eigen_upper();

  auto fail = [&](const std::string& what, const Vector& y, const Vector& zhat, int theta,
                  double value) {
    if (report.pass) {
      report.pass = false;
      report.witness = KernelWitness{what, y, zhat, theta, value};
    }
  };

  for (int s = 0; s < sample_count; ++s) {
    Vector y(n);
    for (int i = 0; i < n; ++i) y[i] = unif(rng);
    const Vector zhat = unit_vector(n, rng);
    const int theta = pick(rng);
    ++report.samples;

    const Matrix a = spec.anisotropy(y, zhat, theta);
    const double scale = std::max(1.0, a.norm());
    if ((a - a.transpose()).norm() > kRelTol * scale) {
      fail("symmetry", y, zhat, theta, (a - a.transpose()).norm());
      continue;
    }
    const Matrix a_neg = spec.anisotropy(y, -zhat, theta);
    if ((a - a_neg).norm() > kRelTol * scale) {
      fail("evenness", y, zhat, theta, (a - a_neg).norm());
      continue;
    }
    for (int k = 0; k < n; ++k) {
      Vector shifted = y;
      shifted[k] += 1.0;
      const Matrix a_per = spec.anisotropy(shifted, zhat, theta);
      if ((a - a_per).norm() > 1e-9 * scale) fail("periodicity", y, zhat, theta, (a - a_per).norm());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    const double emin = es.eigenvalues().minCoeff(), emax = es.eigenvalues().maxCoeff();
    if (emin < lo * (1.0 - kRelTol)) {
      fail("eigenvalue below Gamma^{-2/(N+sigma)}", y, zhat, theta, emin);
      continue;
    }
    if (emax > hi * (1.0 + kRelTol)) {
      fail("eigenvalue above gamma^{-2/(N+sigma)}", y, zhat, theta, emax);
      continue;
    }
    const double radius = std::exp(6.0 * unif(rng) - 3.0);
    const Vector z = radius * zhat;
    const double k = std::pow(std::abs(z.dot(a * z)), -spec.order() / 2.0) *
                     std::pow(radius, spec.order());
    if (k < spec.gamma * (1.0 - 1e-10) || k > spec.Gamma * (1.0 + 1e-10)) {
      fail("kernel sandwich", y, zhat, theta, k);
    }

    // Hoelder spot check along a short random displacement in y.
    Vector dy(n);
    const double step = 1e-3 * (0.5 + unif(rng));
    for (int i = 0; i < n; ++i) dy[i] = unif(rng) - 0.5;
    if (dy.norm() > 0) {
      dy *= step / dy.norm();
      const Matrix a2 = spec.anisotropy(y + dy, zhat, theta);
      report.holder_quotient = std::max(
          report.holder_quotient, (a - a2).norm() / std::pow(dy.norm(), spec.holder_alpha));
    }
  }
  return report;
}

}  // namespace nlhjb
