// Acceptance driver: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fracplasma/checks.hpp"
#include "fracplasma/free_boundary.hpp"
#include "fracplasma/frequency.hpp"
#include "fracplasma/plasma.hpp"
#include "oracles.hpp"

using namespace fracplasma;

namespace {

struct Line {
  std::string id;
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
  double seconds = 0.0;
};

std::vector<Line> lines;

double now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

void report(Line l) {
  std::printf("%s  %-4s %-28s measured=%-12.4g tol=%-10.3g %6.2f s  %s\n", l.pass ? "PASS" : "FAIL", l.id.c_str(),
              l.name.c_str(), l.measured, l.tolerance, l.seconds, l.detail.c_str());
  std::fflush(stdout);
  lines.push_back(std::move(l));
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::shared_ptr<const EigenBasis> basis_for(const ShapeSpec& shape, int n) {
  return EigenBasis::compute(std::make_shared<const Domain>(Domain::build(shape, n)));
}

const ShapeSpec kInterval = ShapeSpec::interval(0.0, M_PI);
const ShapeSpec kSquare = ShapeSpec::rectangle({0.0, 0.0}, {M_PI, M_PI});
constexpr double kGamma = 0.1;

YMesh plasma_mesh(const EigenBasis& b, double s, int layers = 200) {
  return YMesh::graded(20.0 / std::sqrt(b.eigenvalue(0)), layers, YMesh::default_grading(1.0 - 2.0 * s));
}

struct Solved {
  std::string label;
  std::shared_ptr<const EigenBasis> basis;
  PlasmaSolution sol;
  double lambda;
};

// Converged solutions collected for the sign check.
std::vector<Solved> solutions;

Solved solve_at(const ShapeSpec& shape, int n, double s, const std::string& label) {
  const auto b = basis_for(shape, n);
  const double lambda = 4.0 * std::pow(b->eigenvalue(0), s);
  Solved out{label, b, solve_fixed_lambda(lambda, kGamma, s, b), lambda};
  if (out.sol.converged() && s < 1.0) solutions.push_back(out);
  return out;
}

void criterion1() {
  const double t0 = now();
  const auto b = basis_for(kInterval, 257);
  const SpectralField u(b, random_coefficients(*b, 20, 2024));
  double worst = 0.0, min_order = 1e9;
  std::string orders;
  for (double s : {0.25, 0.5, 0.75}) {
    const YMesh mesh = plasma_mesh(*b, s);
    worst = std::max(worst, d2n_relative_error(u, s, mesh));
    const RefinementStudy st = fd_refinement(u, s, mesh.height, 50, 2);
    min_order = std::min(min_order, st.min_order());
    orders += fmt(" %.2f", st.min_order());
  }
  const double dt = now() - t0;
  report({"1a", "d2n_equivalence", worst <= 1e-5 && dt < 30.0, worst, 1e-5, "s = 0.25 0.5 0.75, M = 200", dt});
  report({"1b", "fd_convergence_order", min_order >= 1.0 && dt < 30.0, min_order, 1.0,
          "min order per s:" + orders + ", M = 50..200", 0.0});
}

void criterion2() {
  const double t0 = now();
  const auto b = basis_for(kInterval, 257);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> order(0.01, 0.49);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double s1 = order(rng), s2 = order(rng);
    const SpectralField u(b, random_coefficients(*b, b->size(), 100 + static_cast<std::uint64_t>(t)));
    const Eigen::VectorXd lhs = apply_fractional(apply_fractional(u, s1), s2).nodal();
    const Eigen::VectorXd rhs = apply_fractional(u, s1 + s2).nodal();
    worst = std::max(worst, (lhs - rhs).norm() / rhs.norm());
  }
  double stencil = 0.0;
  for (const auto& [shape, n] : {std::pair{kInterval, 257}, std::pair{kSquare, 65}}) {
    const auto bb = basis_for(shape, n);
    const SpectralField u(bb, random_coefficients(*bb, bb->size(), 3));
    const Eigen::VectorXd ref = bb->domain().apply_laplacian(u.nodal());
    stencil = std::max(stencil, (apply_fractional(u, 1.0).nodal() - ref).norm() / ref.norm());
  }
  const double dt = now() - t0;
  report({"2a", "semigroup", worst <= 1e-10 && dt < 5.0, worst, 1e-10, "100 random fields, n = 257", dt});
  report({"2b", "order_one_stencil", stencil <= 1e-9 && dt < 5.0, stencil, 1e-9, "interval 257, square 65", 0.0});
}

void criterion3() {
  const double t0 = now();
  const Solved half = solve_at(kInterval, 257, 0.5, "interval s=0.5");
  const double r = half.sol.converged() ? half.sol.residual : INFINITY;

  const int n = 257;
  const auto b = basis_for(kInterval, n);
  const double lambda = 4.0 * b->eigenvalue(0);
  const PlasmaSolution one = solve_fixed_lambda(lambda, kGamma, 1.0, b);
  Eigen::VectorXd guess(n - 2);
  const double h = M_PI / (n - 1);
  for (int i = 0; i < n - 2; ++i) guess[i] = oracle::interval_plasma_s1((i + 1) * h, lambda, kGamma);
  const oracle::NewtonResult ref = oracle::stencil_plasma_newton_1d(n, M_PI, lambda, kGamma, guess);
  const double diff = one.converged() && ref.converged ? (one.u.nodal() - ref.u).cwiseAbs().maxCoeff() : INFINITY;
  const double dt = now() - t0;
  report({"3a", "plasma_residual", r <= 1e-10 && dt < 10.0, r, 1e-10,
          "status " + to_string(half.sol.status) + ", " + std::to_string(half.sol.iterations) + " Newton steps", dt});
  report({"3b", "order_one_newton_oracle", diff <= 1e-8 && dt < 10.0, diff, 1e-8,
          "oracle " + std::to_string(ref.iterations) + " iterations", 0.0});
}

void criterion5() {
  const double t0 = now();
  std::size_t violations = 0, checked = 0, failed = 0;
  for (double s : {0.3, 0.5, 0.75}) {
    for (const auto& [shape, n] : {std::pair{kInterval, 257}, std::pair{kSquare, 65}}) {
      const Solved sv = solve_at(shape, n, s, std::string(shape.dim() == 1 ? "interval" : "square") + fmt(" s=%.2f", s));
      if (!sv.sol.converged()) {
        ++failed;
        continue;
      }
      const InclusionReport inc = check_boundary_inclusion(sv.basis->domain(), sv.sol.u.nodal(), kGamma);
      violations += inc.violations.size();
      checked += inc.checked;
    }
  }
  report({"5", "free_boundary_inclusion", violations == 0 && failed == 0 && checked > 0,
          static_cast<double>(violations), 0.0,
          std::to_string(checked) + " boundary points, 6 solutions, " + std::to_string(failed) + " unconverged",
          now() - t0});
}

void criterion6() {
  const double t0 = now();
  const Solved sv = solve_at(kSquare, 129, 0.75, "square s=0.75 n=129");
  double m = -INFINITY;
  std::size_t nodes = 0;
  if (sv.sol.converged()) {
    const SubharmonicReport rep = check_subharmonic_strip(sv.basis->domain(), sv.sol.u.nodal(), kGamma, 0.75);
    m = rep.min_laplacian;
    nodes = rep.nodes;
  }
  report({"6", "subharmonic_strip", nodes > 0 && m > 0.0, m, 0.0,
          "square n = 129, s = 0.75, " + std::to_string(nodes) + " strip nodes", now() - t0});
}

void criterion4() {
  const double t0 = now();
  double worst = -INFINITY;
  std::size_t violators = 0;
  for (const Solved& sv : solutions) {
    const ExtensionField w = extend_semianalytic(sv.sol.u, sv.sol.s, plasma_mesh(*sv.basis, sv.sol.s));
    const SignReport rep = check_uy_sign(w, 1e-8);
    worst = std::max(worst, rep.max_derivative);
    violators += rep.violators.size();
  }
  report({"4", "uy_sign", violators == 0 && !solutions.empty(), worst, 1e-8,
          std::to_string(solutions.size()) + " converged solutions", now() - t0});
}

ExtensionField model(int dim, double s, int degree) {
  const double a = 1.0 - 2.0 * s;
  const ShapeSpec sh = dim == 1 ? ShapeSpec::interval(-1.0, 1.0) : ShapeSpec::rectangle({-1.0, -1.0}, {1.0, 1.0});
  const auto d = std::make_shared<const Domain>(Domain::build(sh, dim == 1 ? 257 : 65));
  return sample_extension(d, s, YMesh::graded(1.0, 96, YMesh::default_grading(a)),
                          [a, degree](const Point& x, double y) {
                            const double t = x[0];
                            if (degree == 1) return t;
                            if (degree == 2) return t * t - y * y / (1.0 + a);
                            return t * t * t - 3.0 * t * y * y / (1.0 + a);
                          });
}

// Free-boundary points of a plasma solution at which the profile is taken.
std::vector<Point> probe_points(const FreeBoundary& fb, std::size_t count) {
  std::vector<Point> out;
  if (fb.points.empty()) return out;
  const std::size_t step = std::max<std::size_t>(1, fb.points.size() / count);
  for (std::size_t i = 0; i < fb.points.size() && out.size() < count; i += step) out.push_back(fb.points[i].x);
  return out;
}

void criterion7() {
  double t0 = now();
  double worst = 0.0;
  double worst_rescale = 0.0;
  for (int dim : {1, 2}) {
    for (double s : {0.25, 0.5, 0.75}) {
      for (int degree : {1, 2}) {
        const ExtensionField w = model(dim, s, degree);
        const double h = w.domain().max_spacing();
        std::vector<double> radii;
        for (int i = 0; i < 8; ++i) radii.push_back(10.0 * h + (0.4 - 10.0 * h) * i / 7.0);
        const FrequencyProfile p = frequency_profile(w, {0.0, 0.0}, radii, 0.0);
        for (double v : p.N) worst = std::max(worst, std::abs(v - degree));
        for (double r : {10.0 * h, 0.4}) {
          BlowupOptions fine;
          fine.nodes_per_axis = dim == 1 ? 257 : 129;
          fine.layers = 128;
          const BlowupField bu = blowup(w, {0.0, 0.0}, r, 0.0, fine);
          const double nr = frequency_profile(w, {0.0, 0.0}, {r}, 0.0).N[0];
          worst_rescale = std::max(worst_rescale, std::abs(bu.unit_frequency - nr) / nr);
        }
      }
    }
  }
  report({"7a", "frequency_exact_models", worst <= 0.02, worst, 0.02,
          "x1 and x1^2 - y^2/(1+a), 1D n=257 and 2D n=65, s = 0.25 0.5 0.75, r in [10h, 0.4]", now() - t0});
  report({"7b", "rescale_identity", worst_rescale <= 1e-3, worst_rescale, 1e-3, "relative, r = 10h and 0.4, reference grid 257 (1D) / 129 (2D) x 128 layers", 0.0});

  t0 = now();
  std::size_t profiles = 0, violations = 0;
  double max_drop = 0.0;
  for (const auto& [shape, n, s] : {std::tuple{kInterval, 257, 0.5}, std::tuple{kInterval, 257, 0.75},
                                    std::tuple{kSquare, 65, 0.5}, std::tuple{kSquare, 65, 0.75}}) {
    const auto b = basis_for(shape, n);
    const double lambda = 4.0 * std::pow(b->eigenvalue(0), s);
    const PlasmaSolution sol = solve_fixed_lambda(lambda, kGamma, s, b);
    if (!sol.converged()) continue;
    const ExtensionField w = extend_semianalytic(sol.u, s, plasma_mesh(*b, s, shape.dim() == 1 ? 200 : 96));
    const FreeBoundary fb = extract_free_boundary(b->domain(), sol.u.nodal(), kGamma);
    for (const Point& x : probe_points(fb, 4)) {
      const std::vector<double> radii = default_radii(w, x);
      if (radii.size() < 3) continue;
      const FrequencyProfile p = frequency_profile(w, x, radii, lambda, kGamma);
      ++profiles;
      violations += p.monotonicity_violations;
      max_drop = std::max(max_drop, p.max_relative_drop);
    }
  }
  report({"7c", "modified_frequency_monotone", profiles > 0 && violations == 0, max_drop, 1e-3,
          std::to_string(violations) + " violations on " + std::to_string(profiles) +
              " profiles at free-boundary points (max relative drop shown)",
          now() - t0});
}

void criterion8() {
  const double t0 = now();
  bool linear_ok = true, quad_ok = true, cubic_ok = true;
  double c_err = 0.0, n3_err = 0.0;
  std::string tags;
  for (double s : {0.3, 0.5, 0.75}) {
    const double a = 1.0 - 2.0 * s;
    for (int dim : {1, 2}) {
      linear_ok = linear_ok && classify_point(model(dim, s, 1), {0.0, 0.0}, 0.0).tag == PointTag::Regular;
      const Classification q = classify_point(model(dim, s, 2), {0.0, 0.0}, 0.0);
      quad_ok = quad_ok && q.tag == PointTag::SingularCandidate;
      if (q.fitted) c_err = std::max(c_err, std::abs(q.c_relative - 1.0 / (1.0 + a)));
    }
    const Classification c = classify_point(model(2, s, 3), {0.0, 0.0}, 0.0);
    cubic_ok = cubic_ok && c.tag == PointTag::Unresolved;
    n3_err = std::max(n3_err, std::abs(c.n0 - 3.0));
  }
  const double dt = now() - t0;
  report({"8a", "classify_linear_regular", linear_ok, linear_ok ? 0.0 : 1.0, 0.0, "1D and 2D, s = 0.3 0.5 0.75", dt});
  report({"8b", "classify_quadratic_singular", quad_ok && c_err <= 0.02, c_err, 0.02,
          "|c/trace - 1/(1+a)|, singular candidate every time: " + std::string(quad_ok ? "yes" : "no"), 0.0});
  report({"8c", "classify_cubic_unresolved", cubic_ok && n3_err <= 0.15, n3_err, 0.15,
          "|N(0+) - 3|, unresolved every time: " + std::string(cubic_ok ? "yes" : "no"), 0.0});
}

void criterion9() {
  double t0 = now();
  const double s = 0.5;
  const auto b = basis_for(kSquare, 33);
  const PlasmaSolution branch = solve_fixed_lambda(4.0 * std::pow(b->eigenvalue(0), s), kGamma, s, b);
  double defect = INFINITY;
  std::string detail = "branch solve failed";
  if (branch.converged()) {
    const PlasmaSolution mini = minimize_energy(branch.c, kGamma, s, b);
    detail = "minimizer status " + to_string(mini.status) + ", square n = 33, s = 0.5";
    if (mini.converged()) {
      defect = 0.0;
      for (int axis : b->domain().symmetry_axes()) defect = std::max(defect, reflection_defect(b->domain(), mini.u.nodal(), axis));
    }
  }
  report({"9a", "minimizer_symmetry", defect <= 1e-6, defect, 1e-6, detail, now() - t0});

  t0 = now();
  double inc = -INFINITY, change = 0.0;
  for (double sv : {0.25, 0.5, 0.75}) {
    const SteinerStudy st = steiner_study(b, sv, kGamma, 10, 99);
    inc = std::max(inc, st.max_relative_increase);
    change = std::max(change, st.max_constraint_change);
  }
  report({"9b", "steiner_energy", inc <= 1e-12 && change == 0.0, inc, 1e-12,
          "10 fields x 2 axes, s = 0.25 0.5 0.75; max constraint change " + fmt("%.3g", change), now() - t0});
}

Census census_at(int n, double s) {
  const auto b = basis_for(kSquare, n);
  const double lambda = 4.0 * std::pow(b->eigenvalue(0), s);
  const PlasmaSolution sol = solve_fixed_lambda(lambda, kGamma, s, b);
  if (!sol.converged()) throw std::runtime_error("census solve failed");
  const ExtensionField w = extend_semianalytic(sol.u, s, plasma_mesh(*b, s, 96));
  ClassifyOptions o;
  o.level = kGamma;
  return singular_census(w, extract_free_boundary(b->domain(), sol.u.nodal(), kGamma), lambda, o);
}

void criterion10() {
  const double t0 = now();
  const double s = 0.75;
  const Census coarse = census_at(65, s);
  const Census fine = census_at(129, s);
  const double ratio = static_cast<double>(fine.cells) / static_cast<double>(std::max<std::size_t>(coarse.cells, 1));
  const bool sites_equal = coarse.singular_sites == fine.singular_sites;
  const bool scaling = ratio >= 2.0 / 1.5 && ratio <= 2.0 * 1.5;
  report({"10", "singular_census", sites_equal && scaling, ratio, 1.5,
          "cells " + std::to_string(coarse.cells) + " -> " + std::to_string(fine.cells) + ", singular sites " +
              std::to_string(coarse.singular_sites) + " -> " + std::to_string(fine.singular_sites) +
              ", unresolved " + std::to_string(coarse.unresolved) + " -> " + std::to_string(fine.unresolved) +
              "; square s = 0.75, n = 65 -> 129",
          now() - t0});
}

void regularity_proxy() {
  const double t0 = now();
  double worst = 0.0;
  for (double s : {0.6, 0.75, 0.9}) {
    for (const auto& [shape, n] : {std::pair{kInterval, 257}, std::pair{kSquare, 65}}) {
      double prev = 0.0;
      for (int m : {n, 2 * n - 1}) {
        const auto b = basis_for(shape, m);
        const PlasmaSolution sol = solve_fixed_lambda(4.0 * std::pow(b->eigenvalue(0), s), kGamma, s, b);
        if (!sol.converged()) {
          worst = INFINITY;
          continue;
        }
        const double d2 = interior_second_difference(b->domain(), sol.u.nodal(), 0.5);
        if (prev > 0.0) worst = std::max(worst, d2 / prev);
        prev = d2;
      }
    }
  }
  report({"R", "regularity_proxy", worst <= 1.2, worst, 1.2,
          "ratio of max interior second differences, one refinement, s = 0.6 0.75 0.9", now() - t0});
}

}  // namespace

int main() {
  const double t0 = now();
  const std::vector<std::function<void()>> steps{criterion1, criterion2, criterion3, criterion5, criterion6,
                                                 criterion4, criterion7, criterion8, criterion9, criterion10,
                                                 regularity_proxy};
  for (const auto& step : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      report({"?", "exception", false, 0.0, 0.0, e.what(), 0.0});
    }
  }
  int failed = 0;
  for (const Line& l : lines) failed += l.pass ? 0 : 1;
  std::printf("%zu checks, %d failed, total %.1f s\n", lines.size(), failed, now() - t0);
  return failed == 0 ? 0 : 1;
}
