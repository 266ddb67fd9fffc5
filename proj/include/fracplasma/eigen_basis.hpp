#pragma once

#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fracplasma/domain.hpp"

namespace fracplasma {

/// Orthonormal Dirichlet eigenpairs of the discrete Laplacian of a Domain,
/// sorted by nondecreasing eigenvalue.
///
/// Intervals and rectangles are decomposed exactly as tensor products of 1D
/// line bases, so analysis and synthesis cost O(N * n) instead of O(N * K).
/// Masked domains use a dense symmetric eigensolve. Every eigenvector is
/// normalized under the discrete inner product h^dim * sum f g and signed so
/// that its first nonzero component is positive.
class EigenBasis {
 public:
  /// `count` = 0 requests the full basis.
  static std::shared_ptr<const EigenBasis> compute(std::shared_ptr<const Domain> domain,
                                                   std::size_t count = 0);

  const Domain& domain() const { return *domain_; }
  const std::shared_ptr<const Domain>& domain_ptr() const { return domain_; }

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues_.size()); }
  bool complete() const { return size() == domain_->interior_count(); }
  bool separable() const { return separable_; }

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  double eigenvalue(std::size_t k) const { return eigenvalues_[static_cast<Eigen::Index>(k)]; }

  /// Nodal values of eigenvector k on the interior nodes.
  Eigen::VectorXd mode(std::size_t k) const;
  /// Coefficients a_k = <f, phi_k>.
  Eigen::VectorXd analyze(const Eigen::VectorXd& nodal) const;
  /// sum_k a_k phi_k.
  Eigen::VectorXd synthesize(const Eigen::VectorXd& coefficients) const;

  /// max_k ||L_h phi_k - lambda_k phi_k|| / ||phi_k||.
  double eigen_residual() const;

 private:
  EigenBasis() = default;

  std::shared_ptr<const Domain> domain_;
  Eigen::VectorXd eigenvalues_;
  bool separable_ = false;

  // Dense storage: interior_count x K.
  Eigen::MatrixXd modes_;

  // Separable storage: per-axis line bases (discrete-orthonormal columns) and
  // the (i, j) factor indices of each sorted mode.
  std::array<Eigen::MatrixXd, 2> line_modes_;
  std::vector<std::pair<int, int>> factors_;
};

}  // namespace fracplasma
