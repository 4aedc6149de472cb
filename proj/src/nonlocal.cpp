#include "nlhjb/nonlocal.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace nlhjb {

namespace {

// b^p - a^p for 0 < a < b without cancellation at large a.
double power_difference(double a, double b, double p) {
  return std::pow(a, p) * std::expm1(p * std::log1p((b - a) / a));
}

// Whole-line unit weight of offset m >= 1 at unit spacing, near field excluded.
double cell_weight(long m, double sigma, double d) {
  const double a = std::max(static_cast<double>(m) - 0.5, d);
  const double b = static_cast<double>(m) + 0.5;
  if (b <= a) return 0.0;
  const double p = 2.0 - sigma;
  const double md = static_cast<double>(m);
  return power_difference(a, b, p) / (p * md * md);
}

Vector compute_unit_weights(int n, double sigma, double d, const StencilOptions& opts) {
  const double hpow = std::pow(static_cast<double>(n), sigma);  // h^{-sigma}
  Vector w = Vector::Zero(n);
  for (int r = 1; r < n; ++r) {
    double sum = cell_weight(r, sigma, d) + cell_weight(n - r, sigma, d);
    long j = 1;
    for (;; ++j) {
      const double inc = cell_weight(r + j * n, sigma, d) + cell_weight((j + 1) * n - r, sigma, d);
      sum += inc;
      if (inc * hpow < opts.lattice_tol) break;
      if (j >= opts.max_lattice_terms) {
        throw std::runtime_error("periodized kernel lattice sum did not converge");
      }
    }
    // Remaining images behave like m^{-1-sigma}; add their integral.
    const double jr = static_cast<double>(j) + 0.5;
    const double tail = (std::pow(r + jr * n, -sigma) + std::pow((jr + 1.0) * n - r, -sigma)) /
                        (sigma * n);
    const double bound = 2.0 * std::pow(jr * n - n, -sigma) / sigma;
    sum += std::min(tail, bound);
    w[r] = sum * hpow;
  }
  const double near = std::pow(d, 2.0 - sigma) / (2.0 - sigma) * hpow;
  w[1] += near;
  w[n - 1] += near;
  return w;
}

struct ProfileCache {
  std::mutex mutex;
  std::map<std::tuple<int, double, double, double>, Vector> profiles;
};

ProfileCache& cache() {
  static ProfileCache c;
  return c;
}

}  // namespace

const Vector& periodized_unit_weights(const TorusGrid& grid, double sigma, double delta,
                                      const StencilOptions& opts) {
  const double h = grid.spacing();
  if (!(delta <= 0.5)) throw std::invalid_argument("near-field radius must not exceed 1/2");
  if (delta < h * (1.0 - 1e-12)) {
    throw std::invalid_argument("near-field radius smaller than the grid spacing");
  }
  if (!(sigma > 1.0 && sigma < 2.0)) throw std::invalid_argument("sigma must lie in (1, 2)");
  const double d = delta / h;
  auto key = std::make_tuple(grid.size(), sigma, d, opts.lattice_tol);
  std::lock_guard lock(cache().mutex);
  auto it = cache().profiles.find(key);
  if (it == cache().profiles.end()) {
    it = cache().profiles.emplace(key, compute_unit_weights(grid.size(), sigma, d, opts)).first;
  }
  return it->second;
}

double unit_near_field_coeff(double sigma, double delta) {
  return std::pow(delta, 2.0 - sigma) / (2.0 - sigma);
}

double kernel_scale(const KernelSpec& spec, int theta, double y) {
  if (spec.dim != 1) throw std::invalid_argument("grid operators are one-dimensional");
  const double plus = kernel_eval(spec, theta, y, 1.0);
  const double minus = kernel_eval(spec, theta, y, -1.0);
  if (std::abs(plus - minus) > 1e-12 * plus) {
    throw std::invalid_argument("kernel is not even in z");
  }
  return plus;
}

// ---------------------------------------------------------------------------

NonlocalStencil::NonlocalStencil(TorusGrid grid, int theta, double y, Vector offdiag,
                                 double near_field_coeff)
    : grid_(grid), theta_(theta), y_(y), offdiag_(std::move(offdiag)),
      near_field_coeff_(near_field_coeff) {
  if (offdiag_.size() != grid_.size()) throw std::invalid_argument("stencil size mismatch");
  offdiag_[0] = 0.0;
  diag_ = -offdiag_.sum();
}

double NonlocalStencil::apply(const GridFunction& phi, long i) const {
  if (!(phi.grid() == grid_)) throw std::invalid_argument("grid function lives on another grid");
  return apply_circulant(offdiag_, phi.values(), i);
}

Vector NonlocalStencil::apply(const Vector& values) const {
  if (values.size() != grid_.size()) throw std::invalid_argument("vector size mismatch");
  return apply_circulant(offdiag_, values);
}

Matrix NonlocalStencil::dense() const {
  const int n = grid_.size();
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = offdiag_[grid_.wrap(j - i)];
    m(i, i) = diag_;
  }
  return m;
}

NonlocalStencil NonlocalStencil::scaled(double factor) const {
  return {grid_, theta_, y_, factor * offdiag_, factor * near_field_coeff_};
}

Vector apply_circulant(const Vector& weights, const Vector& values) {
  const long n = values.size();
  Vector out = Vector::Zero(n);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    const double vi = values[i];
    for (long r = 1; r < n; ++r) {
      long j = i + r;
      if (j >= n) j -= n;
      acc += weights[r] * (values[j] - vi);
    }
    out[i] = acc;
  }
  return out;
}

double apply_circulant(const Vector& weights, const Vector& values, long i) {
  const long n = values.size();
  i = ((i % n) + n) % n;
  double acc = 0.0;
  for (long r = 1; r < n; ++r) {
    long j = i + r;
    if (j >= n) j -= n;
    acc += weights[r] * (values[j] - values[i]);
  }
  return acc;
}

NonlocalStencil build_stencil(const KernelSpec& spec, const TorusGrid& grid, int theta, double y,
                              double delta, const StencilOptions& opts) {
  const double kappa = kernel_scale(spec, theta, y);
  const Vector& unit = periodized_unit_weights(grid, spec.sigma, delta, opts);
  return {grid, theta, y, kappa * unit, kappa * unit_near_field_coeff(spec.sigma, delta)};
}

double apply_nonlocal(const NonlocalStencil& stencil, const GridFunction& phi, long x_index) {
  return stencil.apply(phi, x_index);
}

// ---------------------------------------------------------------------------

namespace {

// sum_{m>=1} (m + z)^{-s} + (m - z)^{-s} for |z| <= 1/2, Euler-Maclaurin tail at M.
double image_sum(double z, double s) {
  constexpr int M = 16;
  double acc = 0.0;
  for (int m = 1; m < M; ++m) acc += std::pow(m + z, -s) + std::pow(m - z, -s);
  for (double a : {M + z, M - z}) {
    acc += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s) +
           s / 12.0 * std::pow(a, -s - 1.0) -
           s * (s + 1.0) * (s + 2.0) / 720.0 * std::pow(a, -s - 3.0);
  }
  return acc;
}

template <class F>
double simpson(F&& f, double a, double b, int nodes) {
  if (nodes % 2) ++nodes;
  const double h = (b - a) / nodes;
  double acc = f(a) + f(b);
  for (int i = 1; i < nodes; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

}  // namespace

double spectral_multiplier_oracle(const KernelSpec& spec, int k, int oracle_nodes) {
  if (!spec.isotropic_scale || spec.dim != 1) {
    throw std::invalid_argument("spectral oracle needs an isotropic one-dimensional kernel");
  }
  if (oracle_nodes < (1 << 14)) throw std::invalid_argument("oracle needs at least 2^14 nodes");
  if (k == 0) return 0.0;
  k = std::abs(k);
  const double sigma = spec.sigma;
  const double s = 1.0 + sigma;
  const double kappa = std::pow(*spec.isotropic_scale, -s / 2.0);
  const double omega = 2.0 * std::numbers::pi * k;

  // Singular part on [0, a] by its power series.
  const double a = 1.0 / (8.0 * k);
  double near = 0.0, term_sign = 1.0, fact = 1.0;
  for (int j = 1; j <= 30; ++j) {
    fact *= (2.0 * j - 1.0) * (2.0 * j);
    near += term_sign * std::pow(omega, 2.0 * j) * std::pow(a, 2.0 * j - sigma) /
            (fact * (2.0 * j - sigma));
    term_sign = -term_sign;
  }
  const double far = simpson(
      [&](double z) { return (1.0 - std::cos(omega * z)) * std::pow(z, -s); }, a, 0.5,
      oracle_nodes);
  const double images = simpson(
      [&](double z) { return (1.0 - std::cos(omega * z)) * image_sum(z, s); }, 0.0, 0.5,
      oracle_nodes);
  return 2.0 * kappa * (near + far + images);
}

// ---------------------------------------------------------------------------

StencilBank::StencilBank(const KernelSpec& spec, TorusGrid grid, std::vector<double> frozen_y,
                         double delta_ratio, const StencilOptions& opts)
    : grid_(grid), frozen_y_(std::move(frozen_y)) {
  const double delta = delta_ratio * grid_.spacing();
  unit_ = periodized_unit_weights(grid_, spec.sigma, delta, opts);
  unit_near_ = unit_near_field_coeff(spec.sigma, delta);
  scales_.resize(static_cast<long>(frozen_y_.size()), spec.controls);
  for (std::size_t j = 0; j < frozen_y_.size(); ++j) {
    for (int t = 0; t < spec.controls; ++t) {
      scales_(static_cast<long>(j), t) = kernel_scale(spec, t, frozen_y_[j]);
    }
  }
}

NonlocalStencil StencilBank::stencil(int j, int theta) const {
  const double kappa = scales_(j, theta);
  return {grid_, theta, frozen_y_[j], kappa * unit_, kappa * unit_near_};
}

StencilBank grid_bank(const KernelSpec& spec, const TorusGrid& grid, double delta_ratio) {
  std::vector<double> ys(grid.size());
  for (int i = 0; i < grid.size(); ++i) ys[i] = grid.point(i);
  return StencilBank(spec, grid, std::move(ys), delta_ratio);
}

HolderCheck nonlocal_x_holder_check(const KernelSpec& spec, const TorusGrid& grid,
                                    const GridFunction& phi, double alpha_prime, int theta,
                                    double y, int levels) {
  if (!(alpha_prime > 0.0 && alpha_prime < spec.holder_alpha)) {
    throw std::invalid_argument("alpha' must lie in (0, holder_alpha)");
  }
  const NonlocalStencil st = build_stencil(spec, grid, theta, y);
  const Vector lphi = st.apply(phi.values());
  const int n = grid.size();
  HolderCheck out;
  double running = 0.0;
  int sep = std::max(1, n / 8);
  for (int level = 0; level < levels && sep >= 1; ++level, sep /= 2) {
    double q = 0.0;
    const double dist = std::pow(sep * grid.spacing(), alpha_prime);
    for (int i = 0; i < n; ++i) {
      q = std::max(q, std::abs(lphi[(i + sep) % n] - lphi[i]) / dist);
    }
    const double previous = running;
    running = std::max(running, q);
    if (level > 0 && previous > 0.0) {
      out.worst_growth = std::max(out.worst_growth, running / previous - 1.0);
    }
    out.separations.push_back(sep);
    out.quotients.push_back(running);
  }
  out.max_quotient = running;
  return out;
}

}  // namespace nlhjb
