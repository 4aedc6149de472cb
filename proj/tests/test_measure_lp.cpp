#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nlhjb/measure_lp.hpp"
#include "nlhjb/presets.hpp"
#include "nlhjb/simplex.hpp"

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

TEST_CASE("simplex: small optimal problem") {
  // min -x - y  s.t.  x + 2y + s1 = 4,  3x + y + s2 = 6
  Matrix a(2, 4);
  a << 1, 2, 1, 0, 3, 1, 0, 1;
  const Vector b = (Vector(2) << 4, 6).finished();
  const Vector c = (Vector(4) << -1, -1, 0, 0).finished();
  const LpResult r = solve_lp(a, b, c);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.value == doctest::Approx(-2.8));
  CHECK(r.x[0] == doctest::Approx(1.6));
  CHECK(r.x[1] == doctest::Approx(1.2));
}

TEST_CASE("simplex: infeasible and unbounded") {
  Matrix a(2, 2);
  a << 1, 1, 1, 1;
  CHECK(solve_lp(a, (Vector(2) << 1, 2).finished(), Vector::Zero(2)).status == LpStatus::infeasible);
  Matrix u(1, 2);
  u << 1, -1;
  CHECK(solve_lp(u, (Vector(1) << 1).finished(), (Vector(2) << -1, 0).finished()).status ==
        LpStatus::unbounded);
  CHECK_THROWS_AS(solve_lp(u, Vector::Zero(2), Vector::Zero(2)), std::invalid_argument);
}

TEST_CASE("simplex: redundant rows and negative right-hand sides") {
  Matrix a(3, 3);
  a << 1, 1, 1, 2, 2, 2, -1, 0, 1;
  const Vector b = (Vector(3) << 1, 2, 0).finished();
  const Vector c = (Vector(3) << 3, 1, 2).finished();
  const LpResult r = solve_lp(a, b, c);
  REQUIRE(r.status == LpStatus::optimal);
  // x1 = x3, x2 = 1 - 2 x1: optimum puts everything on x2.
  CHECK(r.value == doctest::Approx(1.0));
  CHECK((a * r.x - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("LP ergodic constant: y-independent kernel") {
  const TorusGrid g(16);
  const ControlledGenerator gen = cell_generator(make_isotropic_kernel(1, 1.5), g);
  const Matrix cost = sample_cost(g, 1, [](double y, int) { return std::cos(2 * pi * y) + 0.2 * y * (1 - y); });
  const LpErgodicResult r = lp_ergodic_constant(gen, cost);
  CHECK(std::abs(r.c + cost.mean()) < 1e-12);
  CHECK((r.mu_star.weights.array() - 1.0 / 16).abs().maxCoeff() < 1e-12);
  CHECK(is_stationary(gen, r.mu_star));
}

TEST_CASE("LP ergodic constant: constant costs") {
  const TorusGrid g(16);
  const ControlledGenerator gen = cell_generator(make_preset("p5-generic").kernel, g);
  Matrix cost(16, 2);
  cost.col(0).setConstant(0.9);
  cost.col(1).setConstant(0.3);
  const LpErgodicResult r = lp_ergodic_constant(gen, cost);
  CHECK(std::abs(r.c + 0.3) < 1e-12);
  CHECK(r.mu_star.weights.col(0).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_NOTHROW(r.mu_star.validate());
}

TEST_CASE("LP and vanishing discount agree") {
  for (const char* name : {"p1-isotropic-linear", "p2-two-control-constant", "p5-generic"}) {
    const ControlProblem p = make_preset(name);
    for (int n : {8, 16, 32}) {
      const EffectiveEvaluator eval(p, TorusGrid(32), TorusGrid(n));
      const GridFunction phi = GridFunction::sample(TorusGrid(32), [](double s) { return 0.2 * std::cos(2 * pi * s); });
      const Matrix cost = eval.frozen_cost(phi, 7, 0.4);
      const double c_lp = lp_ergodic_constant(eval.cell(), cost).c;
      const double c_dis = ergodic_constant(eval.cell(), cost).c;
      CHECK(std::abs(c_lp - c_dis) <= 1e-6);
    }
  }
}

TEST_CASE("LP size cap") {
  const TorusGrid g(512);
  const ControlledGenerator gen = cell_generator(make_preset("p5-generic").kernel, g);
  CHECK_THROWS_AS(lp_ergodic_constant(gen, Matrix::Zero(512, 2)), std::invalid_argument);
}

TEST_CASE("averaged ingredients of a point mass") {
  const ControlProblem p5 = make_preset("p5-generic");
  const TorusGrid cell(16), x(32);
  OccupationalMeasure mu{Matrix::Zero(16, 2)};
  mu.weights(5, 1) = 1.0;
  const AveragedIngredients avg = averaged_ingredients(p5, mu, cell, x);
  const NonlocalStencil direct = build_stencil(p5.kernel, x, 1, cell.point(5));
  CHECK((avg.k_bar.offdiag_weights() - direct.offdiag_weights()).cwiseAbs().maxCoeff() <
        1e-12 * direct.offdiag_weights().maxCoeff());
  for (int i = 0; i < 32; ++i) {
    CHECK(avg.f_bar[i] == p5.drift(x.point(i), cell.point(5), 1));
    CHECK(avg.l_bar[i] == p5.cost(x.point(i), cell.point(5), 1));
  }
}

TEST_CASE("averaged ingredients of a uniform measure") {
  ControlProblem p = make_preset("p3-rate-i");
  p.drift = [](double x, double, int) { return std::sin(2 * pi * x); };
  p.drift_bound = 1.0;
  const TorusGrid cell(8), x(16);
  OccupationalMeasure mu{Matrix::Constant(8, 2, 1.0 / 16)};
  const AveragedIngredients avg = averaged_ingredients(p, mu, cell, x);
  for (int i = 0; i < 16; ++i) CHECK(avg.f_bar[i] == doctest::Approx(std::sin(2 * pi * x.point(i))));
  for (int r = 1; r < 16; ++r) {
    CHECK(avg.k_bar.weight(r) >= 0.0);
    CHECK(avg.k_bar.weight(r) == doctest::Approx(avg.k_bar.weight(-r)));
  }
  CHECK(avg.l_bar.cwiseAbs().maxCoeff() <= p.cost_bound);
  OccupationalMeasure bad{Matrix::Constant(8, 2, 0.1)};
  CHECK_THROWS_AS(averaged_ingredients(p, bad, cell, x), std::invalid_argument);
}

TEST_CASE("feasible measures give lower bounds, the optimal one attains H") {
  const ControlProblem p5 = make_preset("p5-generic");
  const TorusGrid x(32), cell(16);
  const EffectiveEvaluator eval(p5, x, cell);
  const GridFunction phi = GridFunction::sample(x, [](double s) { return 0.3 * std::sin(2 * pi * s); });
  std::mt19937_64 rng(7);
  std::bernoulli_distribution coin(0.5);
  for (long i : {0L, 11L, 25L}) {
    const double p = 0.3;
    const double hbar = eval(phi, i, p).value;
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<int> policy(16);
      for (int& t : policy) t = coin(rng);
      const Vector m = stationary_distribution(eval.cell().assemble(policy));
      OccupationalMeasure mu{Matrix::Zero(16, 2)};
      for (int j = 0; j < 16; ++j) mu.weights(j, policy[j]) = std::max(m[j], 0.0);
      mu.weights /= mu.weights.sum();
      REQUIRE(is_stationary(eval.cell(), mu, 1e-8));
      const AveragedIngredients avg = averaged_ingredients(p5, mu, cell, x);
      CHECK(averaged_bellman_value(avg, phi, i, p) <= hbar + 1e-6);
    }
    const LpErgodicResult lp = lp_ergodic_constant(eval.cell(), eval.frozen_cost(phi, i, p));
    const AveragedIngredients best = averaged_ingredients(p5, lp.mu_star, cell, x);
    CHECK(averaged_bellman_value(best, phi, i, p) == doctest::Approx(hbar).epsilon(1e-8));
  }
}

TEST_CASE("cone membership") {
  const TorusGrid g(16);
  const ControlledGenerator gen = cell_generator(make_preset("p5-generic").kernel, g);
  CHECK(cone_membership(gen, Matrix::Constant(16, 2, 1.0)).member);
  const ConeMembership neg = cone_membership(gen, Matrix::Constant(16, 2, -1.0));
  CHECK_FALSE(neg.member);
  CHECK(neg.margin == doctest::Approx(-1.0));

  const Matrix a = sample_cost(g, 2, [](double y, int t) { return t == 0 ? 0.6 + std::cos(2 * pi * y) : 0.8 - std::sin(2 * pi * y); });
  const Matrix b = sample_cost(g, 2, [](double y, int t) { return t == 0 ? 0.9 - std::sin(4 * pi * y) : 1.0 + std::cos(2 * pi * y); });
  const ConeMembership ma = cone_membership(gen, a), mb = cone_membership(gen, b);
  REQUIRE(ma.member);
  REQUIRE(mb.member);
  CHECK(cone_membership(gen, 2.0 * a).member);
  CHECK(cone_membership(gen, 0.5 * (a + b)).member);
  CHECK(cone_membership(gen, 0.5 * (a + b)).margin >= 0.5 * (ma.margin + mb.margin) - 1e-12);
}

TEST_CASE("minimax gap") {
  const ControlProblem p5 = make_preset("p5-generic");
  const TorusGrid g(16);
  const ControlledGenerator gen = cell_generator(p5.kernel, g);
  const Matrix cost = sample_cost(g, 2, [&](double y, int t) { return p5.cost(0.2, y, t); });

  std::vector<Vector> basis;
  for (int i = 0; i < 16; ++i) basis.push_back(Vector::Unit(16, i));
  const MinimaxGap full = minimax_gap(gen, cost, basis);
  CHECK(full.gap >= -1e-9);
  CHECK(full.gap <= 1e-4);

  std::vector<Vector> few;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 4; ++k) {
    few.push_back(GridFunction::sample(g, [k](double y) { return std::cos(2 * pi * k * y); }).values());
    few.push_back(GridFunction::sample(g, [k](double y) { return std::sin(2 * pi * k * y); }).values());
    const MinimaxGap r = minimax_gap(gen, cost, few);
    CHECK(r.gap >= -1e-9);
    CHECK(r.gap <= last + 1e-12);
    last = r.gap;
  }

  const ControlledGenerator single = cell_generator(make_isotropic_kernel(1, 1.5), g);
  CHECK(std::abs(minimax_gap(single, Matrix::Constant(16, 1, 0.4), {}).gap) <= 1e-15);
}

TEST_CASE("occupational measure output") {
  OccupationalMeasure mu{Matrix::Zero(2, 2)};
  mu.weights(0, 1) = 0.25;
  mu.weights(1, 0) = 0.75;
  std::ostringstream os;
  mu.write(os);
  CHECK(os.str().find("# y_index theta weight") == 0);
  CHECK(os.str().find("1 0 0.75") != std::string::npos);
  OccupationalMeasure neg{Matrix::Constant(2, 1, 0.5)};
  neg.weights(0, 0) = -0.1;
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
}
