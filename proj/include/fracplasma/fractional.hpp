#pragma once

#include <memory>

#include <Eigen/Dense>

#include "fracplasma/eigen_basis.hpp"

namespace fracplasma {

/// A thin-space field held both as eigen-coefficients and as nodal values.
///
/// Both representations are filled at construction, so a SpectralField is
/// immutable and safe to share. `truncation_residual` is the norm of the part
/// of the source nodal field lying outside the span of the basis (zero for
/// fields built from coefficients or projected onto a complete basis).
class SpectralField {
 public:
  SpectralField(std::shared_ptr<const EigenBasis> basis, Eigen::VectorXd coefficients);

  const EigenBasis& basis() const { return *basis_; }
  const std::shared_ptr<const EigenBasis>& basis_ptr() const { return basis_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  const Eigen::VectorXd& nodal() const { return nodal_; }
  double truncation_residual() const { return truncation_residual_; }

 private:
  friend SpectralField project(const Eigen::VectorXd& nodal, std::shared_ptr<const EigenBasis> basis);

  std::shared_ptr<const EigenBasis> basis_;
  Eigen::VectorXd coefficients_;
  Eigen::VectorXd nodal_;
  double truncation_residual_ = 0.0;
};

SpectralField project(const Eigen::VectorXd& nodal, std::shared_ptr<const EigenBasis> basis);

/// (-Delta)^s on the span of the basis: coefficients lambda_k^s a_k.
SpectralField apply_fractional(const SpectralField& u, double s);
/// Inverse of apply_fractional: coefficients lambda_k^-s b_k.
SpectralField invert_fractional(const SpectralField& g, double s);
/// D(u) = <u, (-Delta)^s u> = sum lambda_k^s a_k^2.
double fractional_energy(const SpectralField& u, double s);

/// lambda_k^s for every eigenvalue, computed as exp(s log lambda_k).
Eigen::VectorXd fractional_multipliers(const EigenBasis& basis, double s);

/// Throws std::invalid_argument unless s lies in (0, 1].
void require_order(double s);

}  // namespace fracplasma
