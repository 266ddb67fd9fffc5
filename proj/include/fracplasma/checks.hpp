#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "fracplasma/extension.hpp"

namespace fracplasma {

// Measurements shared by the verify command and the acceptance driver.

/// Standard normal coefficients on the first `modes` modes, zero elsewhere.
Eigen::VectorXd random_coefficients(const EigenBasis& basis, std::size_t modes, std::uint64_t seed);

/// Smooth nonnegative test fields |3 phi_1 + sum_{k<12} c_k phi_k| with
/// c_k uniform in [-1/2, 1/2].
std::vector<Eigen::VectorXd> random_bumps(const EigenBasis& basis, int count, std::uint64_t seed);

/// ||dtn(extend_semianalytic(u)) - (-Delta)^s u|| / ||(-Delta)^s u||.
double d2n_relative_error(const SpectralField& u, double s, const YMesh& mesh);

struct RefinementStudy {
  std::vector<int> layers;
  /// max |w_fd - w_semianalytic| / max |w_semianalytic|
  std::vector<double> errors;
  std::vector<double> orders;
  double min_order() const;
};
/// extend_fd against extend_semianalytic on M, 2M, ..., 2^refinements M layers.
RefinementStudy fd_refinement(const SpectralField& u, double s, double height, int layers, int refinements = 2);

/// ||u - u o reflect_axis||_inf.
double reflection_defect(const Domain& domain, const Eigen::VectorXd& nodal, int axis);

struct SteinerStudy {
  int fields = 0;
  /// max over fields and axes of (D(Su) - D(u)) / D(u).
  double max_relative_increase = 0.0;
  /// max |G(Su) - G(u)|.
  double max_constraint_change = 0.0;
};
SteinerStudy steiner_study(std::shared_ptr<const EigenBasis> basis, double s, double gamma, int fields,
                           std::uint64_t seed);

/// Largest discrete second difference over nodes at distance >= margin from
/// the boundary.
double interior_second_difference(const Domain& domain, const Eigen::VectorXd& nodal, double margin);

}  // namespace fracplasma
