#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "fracplasma/free_boundary.hpp"
#include "fracplasma/plasma.hpp"

using namespace fracplasma;

namespace {

Eigen::VectorXd sample(const Domain& d, const std::function<double(const Point&)>& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d.grid_size()));
  for (std::size_t g = 0; g < d.grid_size(); ++g) v[static_cast<Eigen::Index>(g)] = f(d.position(g));
  return v;
}

const ShapeSpec kCentered = ShapeSpec::rectangle({-1.0, -1.0}, {1.0, 1.0});

}  // namespace

TEST_CASE("linear field on an interval crosses once") {
  const Domain d = Domain::build(ShapeSpec::interval(0.0, 1.0), 33);
  const FreeBoundary fb = extract_free_boundary(d, sample(d, [](const Point& x) { return x[0] - 0.5; }), 0.0);
  REQUIRE(fb.points.size() == 1);
  CHECK(fb.points[0].x[0] == doctest::Approx(0.5));
  CHECK(fb.points[0].gradient[0] == doctest::Approx(1.0));
  CHECK(fb.points[0].tag == PointTag::Regular);

  const FreeBoundary shifted = extract_free_boundary(d, sample(d, [](const Point& x) { return x[0]; }), 0.3);
  REQUIRE(shifted.points.size() == 1);
  CHECK(shifted.points[0].x[0] == doctest::Approx(0.3));
  CHECK(shifted.level == 0.3);
}

TEST_CASE("circle contour stays within one cell of the exact circle") {
  const Domain d = Domain::build(kCentered, 65);
  const FreeBoundary fb =
      extract_free_boundary(d, sample(d, [](const Point& x) { return x[0] * x[0] + x[1] * x[1]; }), 0.25);
  REQUIRE(!fb.empty());
  double worst = 0.0;
  for (const BoundaryPoint& p : fb.points) worst = std::max(worst, std::abs(std::hypot(p.x[0], p.x[1]) - 0.5));
  CHECK(worst <= d.max_spacing());
  REQUIRE(fb.chains.size() == 1);
  CHECK(fb.chains[0].front() == fb.chains[0].back());
  CHECK(fb.chains[0].size() == fb.points.size() + 1);
  CHECK(fb.cells.size() >= fb.points.size() / 2);
}

TEST_CASE("constant field gives degenerate cells and no points") {
  const Domain d = Domain::build(kCentered, 9);
  const FreeBoundary fb = extract_free_boundary(d, Eigen::VectorXd::Constant(81, 0.2), 0.2);
  CHECK(fb.empty());
  CHECK(fb.degenerate_cells.size() == 64);
  const FreeBoundary none = extract_free_boundary(d, Eigen::VectorXd::Constant(81, 0.2), 0.5);
  CHECK(none.empty());
  CHECK(none.degenerate_cells.empty());
}

TEST_CASE("gradient estimate of smooth fields") {
  const Domain d = Domain::build(kCentered, 33);
  const GradientEstimate lin = gradient_estimate(d, sample(d, [](const Point& x) { return x[0] + 0.3 * x[1]; }),
                                                 {0.11, -0.2});
  CHECK(lin.gradient[0] == doctest::Approx(1.0));
  CHECK(lin.gradient[1] == doctest::Approx(0.3));
  CHECK(lin.threshold == doctest::Approx(0.0).scale(1.0));
  const GradientEstimate quad =
      gradient_estimate(d, sample(d, [](const Point& x) { return x[0] * x[0] + x[1] * x[1]; }), {0.0, 0.0});
  CHECK(quad.norm < 1e-12);
  CHECK(quad.threshold == doctest::Approx(10.0 * d.max_spacing() * 2.0));
}

TEST_CASE("boundary inclusion") {
  const Domain line = Domain::build(ShapeSpec::interval(-2.0, 2.0), 65);
  CHECK(check_boundary_inclusion(line, sample(line, [](const Point& x) { return x[0] * x[0]; }), 1.0).passed());
  // A plateau at the level separates the two boundaries.
  auto plateau = [](const Point& x) { return x[0] < -0.25 ? x[0] + 0.25 : (x[0] > 0.25 ? x[0] - 0.25 : 0.0); };
  const InclusionReport bad = check_boundary_inclusion(line, sample(line, plateau), 0.0);
  CHECK_FALSE(bad.passed());
  CHECK(bad.violations.size() == 1);
  const Domain sq = Domain::build(kCentered, 33);
  const InclusionReport ring =
      check_boundary_inclusion(sq, sample(sq, [](const Point& x) { return x[0] * x[0] + x[1] * x[1]; }), 0.25);
  CHECK(ring.passed());
  CHECK(ring.checked > 0);
}

TEST_CASE("subharmonic strip") {
  const Domain d = Domain::build(ShapeSpec::interval(-1.0, 1.0), 65);
  // Both fields vanish on the boundary, like a plasma solution.
  const Eigen::VectorXd up = sample(d, [](const Point& x) { return x[0] * x[0] - 1.0; });
  const SubharmonicReport good = check_subharmonic_strip(d, up, -0.75, 0.75);
  CHECK(good.passed());
  CHECK(good.min_laplacian == doctest::Approx(2.0));
  CHECK(good.nodes >= 8);
  const Eigen::VectorXd down = sample(d, [](const Point& x) { return 1.0 - x[0] * x[0]; });
  CHECK_FALSE(check_subharmonic_strip(d, down, 0.75, 0.75).passed());
  CHECK_THROWS_AS(check_subharmonic_strip(d, up, -0.75, 0.5), std::invalid_argument);
}

TEST_CASE("plasma free boundaries satisfy the inclusion") {
  for (double s : {0.3, 0.5, 0.75}) {
    for (const ShapeSpec& shape : {ShapeSpec::interval(0.0, 1.0), ShapeSpec::rectangle({0.0, 0.0}, {1.0, 1.0})}) {
      const auto b = EigenBasis::compute(std::make_shared<const Domain>(Domain::build(shape, shape.dim() == 1 ? 129 : 33)));
      const double gamma = 0.1;
      const PlasmaSolution sol = solve_fixed_lambda(4.0 * std::pow(b->eigenvalue(0), s), gamma, s, b);
      REQUIRE(sol.converged());
      const FreeBoundary fb = extract_free_boundary(b->domain(), sol.u.nodal(), gamma);
      CHECK_FALSE(fb.empty());
      if (shape.dim() == 1) CHECK(fb.points.size() == 2);
      const InclusionReport inc = check_boundary_inclusion(b->domain(), sol.u.nodal(), gamma);
      CHECK(inc.passed());
    }
  }
}

TEST_CASE("plasma solution is subharmonic near its free boundary") {
  const auto b = EigenBasis::compute(std::make_shared<const Domain>(Domain::build(ShapeSpec::rectangle({0.0, 0.0}, {1.0, 1.0}), 129)));
  const double s = 0.75, gamma = 0.1;
  const PlasmaSolution sol = solve_fixed_lambda(4.0 * std::pow(b->eigenvalue(0), s), gamma, s, b);
  REQUIRE(sol.converged());
  const SubharmonicReport rep = check_subharmonic_strip(b->domain(), sol.u.nodal(), gamma, s);
  CHECK(rep.nodes > 0);
  CHECK(rep.passed());
}
