#include "fracplasma/checks.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fracplasma/free_boundary.hpp"
#include "fracplasma/frequency.hpp"
#include "fracplasma/plasma.hpp"

namespace fracplasma {

Eigen::VectorXd random_coefficients(const EigenBasis& basis, std::size_t modes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < std::min(modes, basis.size()); ++k) c[static_cast<Eigen::Index>(k)] = normal(rng);
  return c;
}

std::vector<Eigen::VectorXd> random_bumps(const EigenBasis& basis, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
    c[0] = 3.0;
    for (Eigen::Index k = 1; k < std::min<Eigen::Index>(12, c.size()); ++k) c[k] = unit(rng);
    out.push_back(basis.synthesize(c).cwiseAbs());
  }
  return out;
}

double d2n_relative_error(const SpectralField& u, double s, const YMesh& mesh) {
  const Eigen::VectorXd exact = apply_fractional(u, s).nodal();
  const ExtensionField w = extend_semianalytic(u, s, mesh);
  return (dtn(w) - exact).norm() / exact.norm();
}

double RefinementStudy::min_order() const {
  if (orders.empty()) return 0.0;
  return *std::min_element(orders.begin(), orders.end());
}

RefinementStudy fd_refinement(const SpectralField& u, double s, double height, int layers, int refinements) {
  if (refinements < 1) throw std::invalid_argument("fd_refinement: at least one refinement required");
  RefinementStudy study;
  const double g = YMesh::default_grading(1.0 - 2.0 * s);
  for (int r = 0; r <= refinements; ++r) {
    const int m = layers << r;
    const YMesh mesh = YMesh::graded(height, m, g);
    const ExtensionField exact = extend_semianalytic(u, s, mesh);
    const ExtensionField fd = extend_fd(u.nodal(), u.basis(), s, mesh);
    study.layers.push_back(m);
    study.errors.push_back((fd.values() - exact.values()).cwiseAbs().maxCoeff() /
                           exact.values().cwiseAbs().maxCoeff());
    if (r > 0) study.orders.push_back(std::log2(study.errors[study.errors.size() - 2] / study.errors.back()));
  }
  return study;
}

double reflection_defect(const Domain& domain, const Eigen::VectorXd& nodal, int axis) {
  return (nodal - domain.reflect_field(nodal, axis)).lpNorm<Eigen::Infinity>();
}

SteinerStudy steiner_study(std::shared_ptr<const EigenBasis> basis, double s, double gamma, int fields,
                           std::uint64_t seed) {
  const Domain& d = basis->domain();
  SteinerStudy study;
  study.fields = fields;
  study.max_relative_increase = -std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& f : random_bumps(*basis, fields, seed)) {
    const double e0 = fractional_energy(project(f, basis), s);
    const double g0 = constraint_value(d, f, gamma, ConstraintKind::Quadratic);
    for (int axis : d.symmetry_axes()) {
      const Eigen::VectorXd sf = steiner_symmetrize(d, f, axis);
      const double e1 = fractional_energy(project(sf, basis), s);
      study.max_relative_increase = std::max(study.max_relative_increase, (e1 - e0) / e0);
      study.max_constraint_change =
          std::max(study.max_constraint_change, std::abs(constraint_value(d, sf, gamma, ConstraintKind::Quadratic) - g0));
    }
  }
  return study;
}

double interior_second_difference(const Domain& domain, const Eigen::VectorXd& nodal, double margin) {
  const Eigen::VectorXd bound = nodal_hessian_bound(domain, domain.embed(nodal));
  double out = 0.0;
  for (std::size_t g : domain.interior_nodes()) {
    if (distance_to_boundary(domain, domain.position(g)) + 1e-12 < margin) continue;
    out = std::max(out, bound[static_cast<Eigen::Index>(g)]);
  }
  return out;
}

}  // namespace fracplasma
