#include "fracplasma/fractional.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fracplasma {

void require_order(double s) {
  if (!(s > 0.0 && s <= 1.0)) {
    throw std::invalid_argument("fractional order s must lie in (0, 1], got " + std::to_string(s));
  }
}

SpectralField::SpectralField(std::shared_ptr<const EigenBasis> basis, Eigen::VectorXd coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)) {
  if (!basis_) throw std::invalid_argument("SpectralField: null basis");
  nodal_ = basis_->synthesize(coefficients_);
}

SpectralField project(const Eigen::VectorXd& nodal, std::shared_ptr<const EigenBasis> basis) {
  if (!basis) throw std::invalid_argument("project: null basis");
  SpectralField out(basis, basis->analyze(nodal));
  if (!basis->complete()) out.truncation_residual_ = basis->domain().norm(nodal - out.nodal());
  return out;
}

Eigen::VectorXd fractional_multipliers(const EigenBasis& basis, double s) {
  return (s * basis.eigenvalues().array().log()).exp().matrix();
}

SpectralField apply_fractional(const SpectralField& u, double s) {
  require_order(s);
  return SpectralField(u.basis_ptr(),
                       fractional_multipliers(u.basis(), s).cwiseProduct(u.coefficients()));
}

SpectralField invert_fractional(const SpectralField& g, double s) {
  require_order(s);
  return SpectralField(g.basis_ptr(),
                       g.coefficients().cwiseQuotient(fractional_multipliers(g.basis(), s)));
}

double fractional_energy(const SpectralField& u, double s) {
  require_order(s);
  return fractional_multipliers(u.basis(), s).dot(u.coefficients().cwiseAbs2());
}

}  // namespace fracplasma
