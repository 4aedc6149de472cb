#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlhjb/cell.hpp"
#include "nlhjb/hjb.hpp"
#include "nlhjb/presets.hpp"

using namespace nlhjb;

namespace {

constexpr double pi = std::numbers::pi;

ControlProblem flat_problem(int controls, FieldFn drift, FieldFn cost) {
  ControlProblem p;
  p.name = "test";
  p.kernel = make_isotropic_kernel(1, 1.5, 1.0, controls);
  p.drift = std::move(drift);
  p.cost = std::move(cost);
  p.drift_bound = 1.0;
  p.cost_bound = 2.0;
  return p;
}

Matrix sample_cost(const TorusGrid& g, int controls, const std::function<double(double, int)>& l) {
  Matrix m(g.size(), controls);
  for (int i = 0; i < g.size(); ++i)
    for (int t = 0; t < controls; ++t) m(i, t) = l(g.point(i), t);
  return m;
}

// F(w) = lambda w + max_theta(-G w - cost), by brute force.
Vector bellman_residual(const ControlledGenerator& gen, const Matrix& cost, double lambda,
                        const Vector& w) {
  const Matrix gw = gen.apply_all(w);
  Vector r(w.size());
  for (int i = 0; i < w.size(); ++i) r[i] = lambda * w[i] + (-gw.row(i) - cost.row(i)).maxCoeff();
  return r;
}

}  // namespace

TEST_CASE("hamiltonian examples") {
  const TorusGrid g(16);
  const GridFunction phi = GridFunction::constant(g, 2.0);

  const ControlProblem zero = flat_problem(1, [](double, double, int) { return 0.0; },
                                           [](double, double, int) { return 0.0; });
  CHECK(hamiltonian_eval(zero, phi, 3, 0.2, 0.7).value == doctest::Approx(0.0));

  const ControlProblem two = flat_problem(2, [](double, double, int) { return 0.0; },
                                          [](double, double, int t) { return t == 0 ? -1.0 : -2.0; });
  const HamiltonianValue hv = hamiltonian_eval(two, phi, 5, 0.4, 1.0);
  CHECK(hv.value == doctest::Approx(2.0));
  CHECK(hv.argmax == 1);

  const ControlProblem drift = flat_problem(1, [](double, double, int) { return 1.0; },
                                            [](double, double, int) { return 0.0; });
  CHECK(hamiltonian_eval(drift, phi, 0, 0.0, 2.0).value == doctest::Approx(-2.0));
}

TEST_CASE("hamiltonian uses the nonlocal term") {
  const TorusGrid g(64);
  const ControlProblem p = flat_problem(1, [](double, double, int) { return 0.0; },
                                        [](double, double, int) { return 0.0; });
  const GridFunction phi = GridFunction::sample(g, [](double x) { return std::cos(2 * pi * x); });
  const double m1 = spectral_multiplier_oracle(p.kernel, 1, 1 << 15);
  // -L cos = m(1) cos, at x = 0.
  CHECK(hamiltonian_eval(p, phi, 0, 0.0, 0.0).value == doctest::Approx(m1).epsilon(0.01));
}

TEST_CASE("discounted solve with constant cost") {
  const TorusGrid g(16);
  const ControlledGenerator gen = cell_generator(make_isotropic_kernel(1, 1.5), g);
  for (double lambda : {1.0, 0.1, 1e-3}) {
    const DiscountedSolution s = solve_discounted(gen, Matrix::Constant(16, 1, 0.7), lambda);
    CHECK((s.w.values().array() - 0.7 / lambda).abs().maxCoeff() < 1e-9 * (1 + 0.7 / lambda));
    CHECK(s.residual <= 1e-10);
  }
}

TEST_CASE("discounted solve reproduces the Fourier solution") {
  const KernelSpec k = make_isotropic_kernel(1, 1.5);
  const TorusGrid g(64);
  const ControlledGenerator gen = cell_generator(k, g);
  const double lambda = 1.0;
  const double m1 = spectral_multiplier_oracle(k, 1, 1 << 15);
  const Matrix cost = sample_cost(g, 1, [](double y, int) { return std::cos(2 * pi * y); });
  const DiscountedSolution s = solve_discounted(gen, cost, lambda);
  double err = 0.0;
  for (int i = 0; i < 64; ++i)
    err = std::max(err, std::abs(s.w.values()[i] - std::cos(2 * pi * g.point(i)) / (lambda + m1)));
  CHECK(err <= 0.02 / (lambda + m1));
}

TEST_CASE("policy iteration matches damped value iteration") {
  const ControlProblem p5 = make_preset("p5-generic");
  const TorusGrid g(16);
  const ControlledGenerator gen = cell_generator(p5.kernel, g);
  const Matrix cost = sample_cost(g, 2, [&](double y, int t) { return p5.cost(0.3, y, t); });
  const double lambda = 0.5;

  double row_sum = 0.0;
  for (int t = 0; t < 2; ++t) {
    const Matrix a = gen.assemble(std::vector<int>(16, t));
    row_sum = std::max(row_sum, a.diagonal().cwiseAbs().maxCoeff());
  }
  const double rho = 1.0 / (lambda + row_sum);
  Vector w = Vector::Zero(16);
  Vector r = bellman_residual(gen, cost, lambda, w);
  int it = 0;
  while (r.cwiseAbs().maxCoeff() > 1e-10 && it < 2'000'000) {
    w -= rho * r;
    r = bellman_residual(gen, cost, lambda, w);
    ++it;
  }
  REQUIRE(r.cwiseAbs().maxCoeff() <= 1e-10);

  const DiscountedSolution s = solve_discounted(gen, cost, lambda);
  CHECK((s.w.values() - w).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(s.iterations < 20);
  CHECK(bellman_residual(gen, cost, lambda, s.w.values()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("scheme is monotone in the running cost") {
  const ControlProblem p5 = make_preset("p5-generic");
  const TorusGrid g(32);
  const ControlledGenerator gen = eps_generator(p5, 0.25, g);
  const Matrix base = sample_cost(g, 2, [&](double x, int t) { return p5.cost(x, 4 * x, t); });
  Matrix bumped = base;
  for (int i = 0; i < 32; i += 3) bumped(i, i % 2) += 0.3;
  const DiscountedSolution lo = solve_discounted(gen, base, 1.0);
  const DiscountedSolution hi = solve_discounted(gen, bumped, 1.0);
  CHECK((hi.w.values() - lo.w.values()).minCoeff() >= -1e-12);

  // -G^pi is an M-matrix: every generator has nonnegative off-diagonal entries.
  const Matrix a = gen.assemble(lo.policy);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j)
      if (i != j) CHECK(a(i, j) >= 0.0);
  CHECK(lo.w.sup_norm() <= base.cwiseAbs().maxCoeff() + 1e-12);
}

TEST_CASE("initial policy does not change the discounted solution") {
  const ControlProblem p5 = make_preset("p5-generic");
  const TorusGrid g(32);
  const ControlledGenerator gen = cell_generator(p5.kernel, g);
  const Matrix cost = sample_cost(g, 2, [&](double y, int t) { return p5.cost(0.1, y, t); });
  DiscountOptions a, b;
  a.initial_policy.assign(32, 0);
  b.initial_policy.assign(32, 1);
  const DiscountedSolution sa = solve_discounted(gen, cost, 1e-3, a);
  const DiscountedSolution sb = solve_discounted(gen, cost, 1e-3, b);
  CHECK((sa.w.values() - sb.w.values()).cwiseAbs().maxCoeff() < 1e-9 * sa.w.sup_norm());
}

TEST_CASE("discounted solve rejects bad input") {
  const TorusGrid g(16);
  const ControlledGenerator gen = cell_generator(make_isotropic_kernel(1, 1.5), g);
  CHECK_THROWS_AS(solve_discounted(gen, Matrix::Zero(16, 1), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_discounted(gen, Matrix::Zero(8, 1), 1.0), std::invalid_argument);
  DiscountOptions o;
  o.max_iterations = 0;
  CHECK_THROWS_AS(solve_discounted(gen, Matrix::Random(16, 1), 1.0, o), SolverError);
}

TEST_CASE("eps problem argument checks") {
  const ControlProblem p3 = make_preset("p3-rate-i");
  CHECK(reciprocal_integer(0.125) == 8);
  CHECK_THROWS_AS(reciprocal_integer(0.3), std::invalid_argument);
  CHECK_THROWS_AS(reciprocal_integer(1.5), std::invalid_argument);
  CHECK_THROWS_AS(solve_eps_problem(p3, 0.3, TorusGrid(64)), std::invalid_argument);
  CHECK_THROWS_AS(solve_eps_problem(p3, 1.0 / 8, TorusGrid(32)), std::invalid_argument);
  CHECK_THROWS_AS(solve_eps_problem(p3, 1.0 / 8, TorusGrid(68)), std::invalid_argument);
}

TEST_CASE("eps problem with constant cost") {
  const ControlProblem p = flat_problem(1, [](double, double, int) { return 0.0; },
                                        [](double, double, int) { return 0.6; });
  for (double eps : {1.0, 0.5, 0.125}) {
    const DiscountedSolution s = solve_eps_problem(p, eps, TorusGrid(64));
    CHECK((s.w.values().array() - 0.6).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("eps problem bounded by the cost") {
  for (const auto& name : preset_names()) {
    const ControlProblem p = make_preset(name);
    const DiscountedSolution s = solve_eps_problem(p, 0.25, TorusGrid(64));
    CHECK(s.w.sup_norm() <= p.cost_bound + 1e-9);
    CHECK(s.iterations < 20);
    CHECK(s.residual <= 1e-10);
  }
}

TEST_CASE("y-independent data: eps problem equals the effective solution") {
  const ControlProblem p6 = make_preset("p6-flat");
  const TorusGrid x(32);
  const EffectiveSolution eff = solve_effective(p6, x, TorusGrid(8));
  for (double eps : {0.5, 0.25}) {
    const DiscountedSolution s = solve_eps_problem(p6, eps, x);
    CHECK((s.w.values() - eff.u.values()).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("problem checks") {
  for (const auto& name : preset_names()) CHECK_NOTHROW(check_problem(make_preset(name)));
  ControlProblem bad = make_preset("p1-isotropic-linear");
  bad.cost = [](double x, double, int) { return x; };
  CHECK_THROWS_AS(check_problem(bad), std::invalid_argument);
  bad = make_preset("p1-isotropic-linear");
  bad.lipschitz_C = 0.0;
  CHECK_THROWS_AS(check_problem(bad), std::invalid_argument);
}
