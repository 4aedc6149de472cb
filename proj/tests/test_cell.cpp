#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlhjb/cell.hpp"
#include "nlhjb/presets.hpp"

using namespace nlhjb;

namespace {

constexpr double pi = std::numbers::pi;

Matrix sample_cost(const TorusGrid& g, int controls, const std::function<double(double, int)>& l) {
  Matrix m(g.size(), controls);
  for (int i = 0; i < g.size(); ++i)
    for (int t = 0; t < controls; ++t) m(i, t) = l(g.point(i), t);
  return m;
}

}  // namespace

TEST_CASE("ergodic constant of a constant cost") {
  for (int n : {8, 16, 32}) {
    const ControlledGenerator gen = cell_generator(make_cosine_kernel(1, 1.5, {1.0}, 0.5, {0.0}), TorusGrid(n));
    const ErgodicResult r = ergodic_constant(gen, Matrix::Constant(n, 1, 0.8));
    CHECK(r.c == doctest::Approx(-0.8).epsilon(1e-12));
    CHECK(r.corrector.sup_norm() < 1e-12);
    CHECK(r.occupation.sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("ergodic constant with several constant controls") {
  const TorusGrid g(16);
  const ControlledGenerator gen = cell_generator(make_preset("p5-generic").kernel, g);
  Matrix cost(16, 2);
  cost.col(0).setConstant(1.0);
  cost.col(1).setConstant(0.25);
  const ErgodicResult r = ergodic_constant(gen, cost);
  CHECK(std::abs(r.c + 0.25) <= 1e-12);
  CHECK(r.corrector.sup_norm() < 1e-12);
  CHECK(r.occupation.col(0).sum() < 1e-12);
}

TEST_CASE("y-independent kernel: ergodic constant is minus the mean cost") {
  for (int n : {8, 16, 32, 64}) {
    const TorusGrid g(n);
    const ControlledGenerator gen = cell_generator(make_isotropic_kernel(1, 1.5), g);
    const Matrix cost = sample_cost(g, 1, [](double y, int) {
      return 1.0 + 0.5 * std::cos(2 * pi * y) + 0.3 * std::sin(6 * pi * y);
    });
    const ErgodicResult r = ergodic_constant(gen, cost);
    CHECK(std::abs(r.c + cost.mean()) <= 1e-10);
    CHECK(r.corrector(0) == 0.0);
    // G w = -(c + cost)
    const Vector lw = gen.apply_all(r.corrector.values()).col(0);
    CHECK((lw + cost.col(0) + Vector::Constant(n, r.c)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((r.occupation.col(0).array() - 1.0 / n).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("ergodic constant does not depend on the ladder") {
  const ControlProblem p5 = make_preset("p5-generic");
  const TorusGrid g(32);
  const ControlledGenerator gen = cell_generator(p5.kernel, g);
  const Matrix cost = sample_cost(g, 2, [&](double y, int t) { return p5.cost(0.4, y, t); });
  ErgodicOptions a, b;
  b.ladder = {0.5, 0.05, 5e-3};
  const ErgodicResult ra = ergodic_constant(gen, cost, a);
  const ErgodicResult rb = ergodic_constant(gen, cost, b);
  CHECK(std::abs(ra.c - rb.c) < 1e-9);
  CHECK((ra.corrector.values() - rb.corrector.values()).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(std::abs(ra.c - ra.c_extrapolated) <= 10 * ra.error_estimate + 1e-12);
  CHECK(ra.residual <= 1e-10);
}

TEST_CASE("vanishing-discount ladder behaves linearly in lambda") {
  const ControlProblem p5 = make_preset("p5-generic");
  const TorusGrid g(32);
  const ControlledGenerator gen = cell_generator(p5.kernel, g);
  const Matrix cost = sample_cost(g, 2, [&](double y, int t) { return p5.cost(0.0, y, t); });
  const ErgodicResult r = ergodic_constant(gen, cost);
  REQUIRE(r.rungs.size() == 4);
  CHECK(r.lambda_used == 1e-4);
  const auto& last = r.rungs[3];
  const auto& prev = r.rungs[2];
  CHECK(std::abs(last.oscillation - prev.oscillation) < 0.2 * prev.oscillation);
  for (std::size_t k = 1; k < r.rungs.size(); ++k) {
    const double d0 = std::abs(r.rungs[k - 1].estimate - r.c) / r.rungs[k - 1].lambda;
    const double d1 = std::abs(r.rungs[k].estimate - r.c) / r.rungs[k].lambda;
    CHECK(d1 / d0 >= 0.5);
    CHECK(d1 / d0 <= 2.0);
  }
  CHECK(r.error_estimate >= 0.0);
}

TEST_CASE("ladder validation") {
  const TorusGrid g(8);
  const ControlledGenerator gen = cell_generator(make_isotropic_kernel(1, 1.5), g);
  ErgodicOptions o;
  o.ladder = {0.1, 0.01};
  CHECK_THROWS_AS(ergodic_constant(gen, Matrix::Zero(8, 1), o), std::invalid_argument);
  o.ladder = {0.1, 0.2, 0.01};
  CHECK_THROWS_AS(ergodic_constant(gen, Matrix::Zero(8, 1), o), std::invalid_argument);
}

TEST_CASE("stationary distribution of an assembled policy") {
  const ControlProblem p5 = make_preset("p5-generic");
  const TorusGrid g(16);
  const ControlledGenerator gen = eps_generator(p5, 0.5, g);
  std::vector<int> policy(16);
  for (int i = 0; i < 16; ++i) policy[i] = (i * 7) % 3 == 0;
  const Matrix a = gen.assemble(policy);
  const Vector mu = stationary_distribution(a);
  CHECK(mu.sum() == doctest::Approx(1.0));
  CHECK(mu.minCoeff() > 0.0);
  CHECK((a.transpose() * mu).cwiseAbs().maxCoeff() < 1e-10 * a.cwiseAbs().maxCoeff());
}

TEST_CASE("effective Hamiltonian for y-independent data equals the Hamiltonian") {
  const ControlProblem p6 = make_preset("p6-flat");
  const TorusGrid x(32);
  const GridFunction phi = GridFunction::sample(x, [](double s) { return 0.3 * std::sin(2 * pi * s); });
  for (long i : {0L, 5L, 17L}) {
    for (double p : {0.0, 1.0}) {
      const EffectiveSample h = effective_hamiltonian(p6, phi, i, p, TorusGrid(8));
      CHECK(std::abs(h.value - hamiltonian_eval(p6, phi, i, 0.0, p).value) < 1e-8);
    }
  }
}

TEST_CASE("effective Hamiltonian with zero drift and fast cost") {
  ControlProblem p;
  p.name = "mean";
  p.kernel = make_isotropic_kernel(1, 1.5);
  p.drift = [](double, double, int) { return 0.0; };
  p.cost = [](double, double y, int) { return 1.0 + 0.5 * std::cos(2 * pi * y) + 0.2 * std::sin(2 * pi * y); };
  p.cost_bound = 2.0;
  const TorusGrid x(16), cell(16);
  const EffectiveSample h = effective_hamiltonian(p, GridFunction::constant(x, 0.0), 3, 0.7, cell);
  CHECK(h.value == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(h.error_estimate >= 0.0);
}

TEST_CASE("effective Hamiltonian is monotone in phi") {
  const ControlProblem p5 = make_preset("p5-generic");
  const TorusGrid x(32), cell(16);
  const EffectiveEvaluator eval(p5, x, cell);
  for (int k = 0; k < 6; ++k) {
    const long i = 5 * k;
    const GridFunction phi2 = GridFunction::sample(x, [k](double s) { return std::sin(2 * pi * (s + 0.1 * k)); });
    Vector bump(32);
    for (int j = 0; j < 32; ++j) bump[j] = 0.4 * (1 - std::cos(2 * pi * (x.point(j) - x.point(i))));
    const GridFunction phi1(x, phi2.values() + bump);
    for (double p : {-0.5, 0.5}) {
      CHECK(eval(phi1, i, p).value <= eval(phi2, i, p).value + 1e-8);
    }
  }
}

TEST_CASE("effective solution for zero drift and fast cost is constant") {
  const ControlProblem p3 = make_preset("p3-rate-i");
  const TorusGrid x(32), cell(16);
  const EffectiveSolution s = solve_effective(p3, x, cell);
  const double hbar = effective_hamiltonian(p3, GridFunction::constant(x, 0.0), 0, 0.0, cell).value;
  CHECK((s.u.values().array() + hbar).abs().maxCoeff() < 1e-9);
  CHECK(s.residual <= 1e-9);
}

TEST_CASE("effective solution of the generic problem is self-consistent") {
  const ControlProblem p5 = make_preset("p5-generic");
  const TorusGrid x(32), cell(16);
  const EffectiveSolution s = solve_effective(p5, x, cell);
  CHECK(s.residual <= 1e-9);
  REQUIRE(s.samples.size() == 32);
  const EffectiveEvaluator eval(p5, x, cell);
  const Vector du = centered_gradient(s.u.values());
  double res = 0.0;
  for (int i = 0; i < 32; ++i) res = std::max(res, std::abs(s.u.values()[i] + eval(s.u, i, du[i]).value));
  CHECK(res <= 1e-9);
  CHECK(std::isfinite(s.upwind_residual));
}

TEST_CASE("centered gradient") {
  const TorusGrid g(64);
  const GridFunction f = GridFunction::sample(g, [](double s) { return std::sin(2 * pi * s); });
  const Vector d = centered_gradient(f.values());
  for (int i = 0; i < 64; ++i) CHECK(d[i] == doctest::Approx(2 * pi * std::cos(2 * pi * g.point(i))).epsilon(0.01));
}
