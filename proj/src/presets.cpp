#include "nlhjb/presets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nlhjb {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double zero_field(double, double, int) { return 0.0; }

KernelSpec rate_kernel(double sigma) {
  KernelSpec k = make_cosine_kernel(1, sigma, {1.0, 0.6}, 0.5, {0.0, 0.25});
  k.name = "cosine(1, 0.6; amp 0.5)";
  return k;
}

// Cost shared by the two rate presets: depends on y and theta only.
double rate_cost(double, double y, int theta) {
  return theta == 0 ? 0.5 + 0.5 * std::sin(two_pi * y) : 0.4 + 0.5 * std::cos(two_pi * y);
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"p1-isotropic-linear", "p2-two-control-constant", "p3-rate-i",
          "p4-rate-ii",          "p5-generic",              "p6-flat"};
}

ControlProblem make_preset(const std::string& name, double sigma) {
  ControlProblem p;
  p.name = name;
  p.drift = zero_field;
  if (name == "p1-isotropic-linear") {
    p.kernel = make_isotropic_kernel(1, sigma);
    p.cost = [](double x, double y, int) {
      return 1.0 + 0.5 * std::cos(two_pi * y) + 0.25 * std::sin(two_pi * x);
    };
    p.cost_bound = 1.75;
    p.lipschitz_C = 0.75 * two_pi;
  } else if (name == "p2-two-control-constant") {
    p.kernel = make_isotropic_kernel(1, sigma, 1.0, 2);
    p.cost = [](double, double, int theta) { return theta == 0 ? 1.0 : 0.25; };
    p.cost_bound = 1.0;
    p.lipschitz_C = 1.0;
  } else if (name == "p3-rate-i") {
    p.kernel = rate_kernel(sigma);
    p.cost = rate_cost;
    p.cost_bound = 1.0;
    p.lipschitz_C = 0.5 * two_pi;
  } else if (name == "p4-rate-ii") {
    p.kernel = rate_kernel(sigma);
    p.drift = [](double, double y, int theta) {
      return theta == 0 ? 0.5 * std::sin(two_pi * y) : -0.4 * std::cos(two_pi * y);
    };
    p.cost = rate_cost;
    p.drift_bound = 0.5;
    p.cost_bound = 1.0;
    p.lipschitz_C = 0.5 * two_pi;
  } else if (name == "p5-generic") {
    p.kernel = rate_kernel(sigma);
    p.drift = [](double x, double y, int theta) {
      return theta == 0 ? 0.3 * std::sin(two_pi * (x + y))
                        : -0.2 * std::cos(two_pi * y) + 0.1 * std::sin(two_pi * x);
    };
    p.cost = [](double x, double y, int theta) {
      return theta == 0 ? 1.0 + 0.5 * std::cos(two_pi * y) + 0.3 * std::sin(two_pi * x)
                        : 1.0 + 0.4 * std::sin(two_pi * (y - x)) + 0.2 * std::cos(two_pi * x);
    };
    p.drift_bound = 0.3;
    p.cost_bound = 1.8;
    p.lipschitz_C = 0.8 * two_pi;
  } else if (name == "p6-flat") {
    p.kernel = make_cosine_kernel(1, sigma, {1.0, 0.7}, 0.0, {0.0, 0.0});
    p.kernel.name = "flat(1, 0.7)";
    p.cost = [](double x, double, int theta) {
      return theta == 0 ? std::cos(two_pi * x) + 0.5 : 0.8 - 0.5 * std::sin(two_pi * x);
    };
    p.cost_bound = 1.5;
    p.lipschitz_C = two_pi;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  check_problem(p);
  return p;
}

// ---------------------------------------------------------------------------

DataTable::DataTable(int nx, int ny, int controls)
    : nx_(nx), ny_(ny), controls_(controls),
      f_(static_cast<std::size_t>(nx) * ny * controls, 0.0),
      l_(static_cast<std::size_t>(nx) * ny * controls, 0.0) {
  if (nx < 1 || ny < 1 || controls < 1) throw std::invalid_argument("data table dimensions must be positive");
}

DataTable DataTable::read(std::istream& in) {
  struct Row {
    int ix, iy, theta;
    double f, l;
    int line;
  };
  std::vector<Row> rows;
  std::string line;
  int lineno = 0, mx = -1, my = -1, mt = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    Row r{0, 0, 0, 0.0, 0.0, lineno};
    if (!(ss >> r.ix)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw std::invalid_argument("data table line " + std::to_string(lineno) + ": malformed row");
      }
      continue;
    }
    std::string extra;
    if (!(ss >> r.iy >> r.theta >> r.f >> r.l) || (ss >> extra)) {
      throw std::invalid_argument("data table line " + std::to_string(lineno) +
                                  ": expected `ix iy itheta f l`");
    }
    if (r.ix < 0 || r.iy < 0 || r.theta < 0 || !std::isfinite(r.f) || !std::isfinite(r.l)) {
      throw std::invalid_argument("data table line " + std::to_string(lineno) +
                                  ": negative index or non-finite value");
    }
    mx = std::max(mx, r.ix);
    my = std::max(my, r.iy);
    mt = std::max(mt, r.theta);
    rows.push_back(r);
  }
  if (rows.empty()) throw std::invalid_argument("data table is empty");
  DataTable t(mx + 1, my + 1, mt + 1);
  std::vector<char> seen(t.f_.size(), 0);
  for (const Row& r : rows) {
    const int idx = t.index(r.ix, r.iy, r.theta);
    if (seen[idx]) {
      throw std::invalid_argument("data table line " + std::to_string(r.line) + ": duplicate node");
    }
    seen[idx] = 1;
    t.f_[idx] = r.f;
    t.l_[idx] = r.l;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw std::invalid_argument("data table is missing lattice nodes");
  }
  return t;
}

DataTable DataTable::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open data table " + path);
  return read(in);
}

double DataTable::interp(const std::vector<double>& v, double x, double y, int theta) const {
  const double sx = (x - std::floor(x)) * nx_;
  const double sy = (y - std::floor(y)) * ny_;
  const int x0 = static_cast<int>(sx) % nx_, y0 = static_cast<int>(sy) % ny_;
  const int x1 = (x0 + 1) % nx_, y1 = (y0 + 1) % ny_;
  const double tx = sx - std::floor(sx), ty = sy - std::floor(sy);
  return (1 - tx) * (1 - ty) * v[index(x0, y0, theta)] + tx * (1 - ty) * v[index(x1, y0, theta)] +
         (1 - tx) * ty * v[index(x0, y1, theta)] + tx * ty * v[index(x1, y1, theta)];
}

double DataTable::drift_bound() const {
  double b = 0.0;
  for (double f : f_) b = std::max(b, std::abs(f));
  return b;
}

double DataTable::cost_bound() const {
  double b = 0.0;
  for (double l : l_) b = std::max(b, std::abs(l));
  return b;
}

ControlProblem make_custom_problem(double sigma, const AnisotropyTable& anisotropy,
                                   const DataTable& data) {
  if (anisotropy.dim() != 1) throw std::invalid_argument("custom problems are one-dimensional");
  if (anisotropy.controls() != data.controls()) {
    throw std::invalid_argument("anisotropy and data tables disagree on the number of controls");
  }
  ControlProblem p;
  p.name = "custom";
  p.kernel = make_table_kernel(sigma, anisotropy);
  auto shared = std::make_shared<DataTable>(data);
  p.drift = [shared](double x, double y, int t) { return shared->drift_at(x, y, t); };
  p.cost = [shared](double x, double y, int t) { return shared->cost_at(x, y, t); };
  p.drift_bound = data.drift_bound();
  p.cost_bound = data.cost_bound();
  // Piecewise-linear data: slope bound from the lattice spacing.
  const double span = 2.0 * std::max(p.drift_bound, p.cost_bound) * std::max(data.nx(), data.ny());
  p.lipschitz_C = std::max(span, 1e-12);
  check_problem(p);
  return p;
}

}  // namespace nlhjb
