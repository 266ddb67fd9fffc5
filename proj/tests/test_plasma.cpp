#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fracplasma/checks.hpp"
#include "fracplasma/plasma.hpp"
#include "oracles.hpp"

using namespace fracplasma;

namespace {

std::shared_ptr<const EigenBasis> basis_for(const ShapeSpec& shape, int n) {
  return EigenBasis::compute(std::make_shared<const Domain>(Domain::build(shape, n)));
}

const ShapeSpec kInterval = ShapeSpec::interval(0.0, M_PI);
const ShapeSpec kSquare = ShapeSpec::rectangle({0.0, 0.0}, {1.0, 1.0});

// Along every line parallel to `axis` the values do not increase away from the middle.
bool symmetric_decreasing(const Domain& d, const Eigen::VectorXd& f, int axis) {
  const Eigen::VectorXd g = d.embed(f);
  const int n = d.nodes_per_axis();
  for (int line = 0; line < n; ++line) {
    auto at = [&](int p) { return g[static_cast<Eigen::Index>(axis == 0 ? d.grid_index(p, line) : d.grid_index(line, p))]; };
    for (int p = 1; p < n; ++p) {
      const bool outward = 2 * p > n - 1;
      if (outward && at(p) > at(p - 1)) return false;
      if (!outward && at(p) < at(p - 1)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("fixed-lambda solve has a tiny residual") {
  for (const ShapeSpec& shape : {kInterval, kSquare}) {
    const auto b = basis_for(shape, shape.dim() == 1 ? 257 : 33);
    const double s = 0.5, gamma = 0.1;
    const double lambda = 4.0 * std::pow(b->eigenvalue(0), s);
    const PlasmaSolution sol = solve_fixed_lambda(lambda, gamma, s, b);
    REQUIRE(sol.converged());
    CHECK(sol.nontrivial());
    CHECK(sol.residual <= 1e-10);
    CHECK(plasma_residual(sol.u, lambda, gamma, s) == doctest::Approx(sol.residual).scale(1e-10));
    CHECK(sol.u.nodal().minCoeff() > 0.0);
    CHECK(sol.c == doctest::Approx(constraint_value(b->domain(), sol.u.nodal(), gamma, ConstraintKind::Quadratic)));
  }
}

TEST_CASE("below the first eigenvalue only the trivial solution remains") {
  const auto b = basis_for(kInterval, 65);
  const double s = 0.5;
  const PlasmaSolution sol = solve_fixed_lambda(0.8 * std::pow(b->eigenvalue(0), s), 0.1, s, b);
  CHECK(sol.status == SolveStatus::Trivial);
  CHECK(sol.u.nodal().cwiseAbs().maxCoeff() < 1e-8);
  CHECK_FALSE(sol.nontrivial());
}

TEST_CASE("order one agrees with an independent stencil Newton solve") {
  const int n = 257;
  const auto b = basis_for(kInterval, n);
  const double gamma = 0.1, lambda = 4.0 * b->eigenvalue(0);
  const PlasmaSolution sol = solve_fixed_lambda(lambda, gamma, 1.0, b);
  REQUIRE(sol.converged());

  Eigen::VectorXd guess(n - 2);
  const double h = M_PI / (n - 1);
  for (int i = 0; i < n - 2; ++i) guess[i] = oracle::interval_plasma_s1((i + 1) * h, lambda, gamma);
  const oracle::NewtonResult ref = oracle::stencil_plasma_newton_1d(n, M_PI, lambda, gamma, guess);
  REQUIRE(ref.converged);
  CHECK((sol.u.nodal() - ref.u).cwiseAbs().maxCoeff() <= 1e-8);
  // Continuum solution, second order in h.
  CHECK((sol.u.nodal() - guess).cwiseAbs().maxCoeff() <= 10.0 * h * h);
}

TEST_CASE("constrained solve recovers the multiplier") {
  const auto b = basis_for(kInterval, 129);
  const double s = 0.6, gamma = 0.1;
  const double lambda = 3.0 * std::pow(b->eigenvalue(0), s);
  const PlasmaSolution fixed = solve_fixed_lambda(lambda, gamma, s, b);
  REQUIRE(fixed.converged());
  const PlasmaSolution cons = solve_constrained(fixed.c, gamma, s, b);
  REQUIRE(cons.converged());
  CHECK(cons.lambda == doctest::Approx(lambda).epsilon(1e-5));
  CHECK(std::abs(cons.c - fixed.c) <= 1e-6 * fixed.c);
  CHECK_FALSE(cons.curve.empty());
}

TEST_CASE("constrained solve reports an unreachable target") {
  const auto b = basis_for(kInterval, 65);
  SolverOptions opts;
  opts.bracket_hi = 1.5;
  // Small targets need large multipliers.
  const PlasmaSolution sol = solve_constrained(1e-6, 0.1, 0.5, b, opts);
  CHECK(sol.status == SolveStatus::BracketNotFound);
  CHECK_FALSE(sol.message.empty());
}

TEST_CASE("large constraint targets sit just above the first eigenvalue") {
  const auto b = basis_for(kInterval, 65);
  const double lam1 = std::pow(b->eigenvalue(0), 0.5);
  double prev = 0.0;
  for (double c : {1.0, 100.0, 1000.0}) {
    const PlasmaSolution sol = solve_constrained(c, 0.1, 0.5, b);
    REQUIRE(sol.converged());
    CHECK(sol.lambda > lam1);
    if (prev > 0.0) CHECK(sol.lambda < prev);
    prev = sol.lambda;
  }
}

TEST_CASE("energy minimizer matches the branch solution") {
  for (double s : {0.5, 0.75}) {
    const auto b = basis_for(kInterval, 129);
    const double gamma = 0.1;
    const PlasmaSolution branch = solve_fixed_lambda(3.0 * std::pow(b->eigenvalue(0), s), gamma, s, b);
    REQUIRE(branch.converged());
    const PlasmaSolution mini = minimize_energy(branch.c, gamma, s, b);
    REQUIRE(mini.converged());
    CHECK(std::abs(mini.c - branch.c) <= 1e-5 * branch.c);
    CHECK(fractional_energy(mini.u, s) <= fractional_energy(branch.u, s) * (1.0 + 1e-6));
    CHECK(mini.lambda == doctest::Approx(branch.lambda).epsilon(1e-3));
    CHECK((mini.u.nodal() - branch.u.nodal()).cwiseAbs().maxCoeff() <= 1e-3 * branch.u.nodal().maxCoeff());
  }
}

TEST_CASE("minimizer on the square is symmetric") {
  const auto b = basis_for(kSquare, 25);
  const double s = 0.6, gamma = 0.1;
  const PlasmaSolution branch = solve_fixed_lambda(3.0 * std::pow(b->eigenvalue(0), s), gamma, s, b);
  REQUIRE(branch.converged());
  const PlasmaSolution mini = minimize_energy(branch.c, gamma, s, b);
  REQUIRE(mini.converged());
  for (int axis : b->domain().symmetry_axes()) {
    CHECK(reflection_defect(b->domain(), mini.u.nodal(), axis) <= 1e-6);
    CHECK(reflection_defect(b->domain(), branch.u.nodal(), axis) <= 1e-8);
  }
}

TEST_CASE("minimizer rejects the linear constraint") {
  const auto b = basis_for(kInterval, 33);
  SolverOptions opts;
  opts.constraint = ConstraintKind::Linear;
  CHECK_THROWS_AS(minimize_energy(0.1, 0.1, 0.5, b, opts), std::invalid_argument);
}

TEST_CASE("constraint is invariant under permutations of nodal values") {
  const Domain d = Domain::build(kSquare, 17);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Eigen::VectorXd f(static_cast<Eigen::Index>(d.interior_count()));
  for (auto& v : f) v = u01(rng);
  for (ConstraintKind kind : {ConstraintKind::Quadratic, ConstraintKind::Linear}) {
    const double g0 = constraint_value(d, f, 0.3, kind);
    for (int t = 0; t < 5; ++t) {
      Eigen::VectorXd p = f;
      std::shuffle(p.begin(), p.end(), rng);
      CHECK(constraint_value(d, p, 0.3, kind) == g0);
    }
  }
  // Closed form on a constant field.
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(f.size(), 0.5);
  CHECK(constraint_value(d, c, 0.3, ConstraintKind::Quadratic) ==
        doctest::Approx(d.cell_volume() * static_cast<double>(f.size()) * 0.04));
}

TEST_CASE("Steiner symmetrization") {
  const auto b = basis_for(kSquare, 25);
  const Domain& d = b->domain();
  const std::vector<Eigen::VectorXd> bumps = random_bumps(*b, 3, 17);
  for (const Eigen::VectorXd& f : bumps) {
    for (int axis : {0, 1}) {
      const Eigen::VectorXd g = steiner_symmetrize(d, f, axis);
      CHECK(symmetric_decreasing(d, g, axis));
      CHECK(constraint_value(d, g, 0.1, ConstraintKind::Quadratic) ==
            constraint_value(d, f, 0.1, ConstraintKind::Quadratic));
      // Idempotent.
      CHECK((steiner_symmetrize(d, g, axis) - g).norm() == 0.0);
    }
  }
  for (double s : {0.3, 0.5, 0.8}) {
    const SteinerStudy st = steiner_study(b, s, 0.1, 6, 23);
    CHECK(st.fields == 6);
    CHECK(st.max_relative_increase <= 1e-12);
    CHECK(st.max_constraint_change == 0.0);
  }
  const Domain off = Domain::build(ShapeSpec::disk({-1.0, -1.0}, {1.0, 1.0}, {0.1, 0.0}, 0.8), 17);
  CHECK_THROWS_AS(steiner_symmetrize(off, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(off.interior_count())), 0),
                  std::invalid_argument);
}

TEST_CASE("constrained solutions shrink onto the shift as c goes to zero") {
  const auto b = basis_for(kInterval, 129);
  const double s = 0.5, gamma = 0.1;
  double prev = INFINITY;
  for (double c : {1e-2, 1e-3, 1e-4}) {
    const PlasmaSolution sol = solve_constrained(c, gamma, s, b);
    INFO("c ", c, " status ", to_string(sol.status), " ", sol.message);
    REQUIRE(sol.converged());
    const double excess = sol.u.nodal().maxCoeff() - gamma;
    CHECK(excess > 0.0);
    CHECK(excess < prev);
    prev = excess;

    // Fixed-lambda solve at the returned multiplier gives the same field.
    const PlasmaSolution again = solve_fixed_lambda(sol.lambda, gamma, s, b);
    REQUIRE(again.converged());
    CHECK((again.u.nodal() - sol.u.nodal()).cwiseAbs().maxCoeff() <= 1e-8);
  }
}
