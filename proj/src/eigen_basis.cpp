#include "fracplasma/eigen_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace fracplasma {
namespace {

void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    const double scale = vectors.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      if (std::abs(vectors(r, c)) > 1e-12 * scale) {
        if (vectors(r, c) < 0.0) vectors.col(c) *= -1.0;
        break;
      }
    }
  }
}

// Dirichlet second-difference matrix on m interior points of a line.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> line_eigenpairs(int m, double h) {
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(m, 2.0 / (h * h));
  Eigen::VectorXd sub = Eigen::VectorXd::Constant(std::max(m - 1, 0), -1.0 / (h * h));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecompose: tridiagonal eigensolver failed to converge");
  }
  Eigen::MatrixXd vectors = solver.eigenvectors() / std::sqrt(h);
  fix_signs(vectors);
  return {solver.eigenvalues(), vectors};
}

}  // namespace

std::shared_ptr<const EigenBasis> EigenBasis::compute(std::shared_ptr<const Domain> domain,
                                                      std::size_t count) {
  if (!domain) throw std::invalid_argument("eigendecompose: null domain");
  const std::size_t n_int = domain->interior_count();
  if (count == 0) count = n_int;
  if (count > n_int) {
    throw std::invalid_argument("eigendecompose: requested " + std::to_string(count) +
                                " modes but the domain has only " + std::to_string(n_int) +
                                " interior nodes");
  }

  std::shared_ptr<EigenBasis> basis(new EigenBasis());
  basis->domain_ = domain;
  const Domain& d = *domain;
  const int m = d.nodes_per_axis() - 2;

  if (d.shape().kind != ShapeKind::Disk) {
    basis->separable_ = true;
    auto [mu, psi] = line_eigenpairs(m, d.spacing(0));
    basis->line_modes_[0] = std::move(psi);
    if (d.dim() == 1) {
      basis->eigenvalues_ = mu.head(static_cast<Eigen::Index>(count));
      for (std::size_t k = 0; k < count; ++k) basis->factors_.emplace_back(static_cast<int>(k), 0);
    } else {
      auto [nu, chi] = line_eigenpairs(m, d.spacing(1));
      basis->line_modes_[1] = std::move(chi);
      std::vector<std::pair<int, int>> pairs;
      pairs.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) pairs.emplace_back(i, j);
      std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& p, const auto& q) {
        const double lp = mu[p.first] + nu[p.second];
        const double lq = mu[q.first] + nu[q.second];
        if (lp != lq) return lp < lq;
        return p < q;
      });
      pairs.resize(count);
      basis->eigenvalues_.resize(static_cast<Eigen::Index>(count));
      for (std::size_t k = 0; k < count; ++k) {
        basis->eigenvalues_[static_cast<Eigen::Index>(k)] = mu[pairs[k].first] + nu[pairs[k].second];
      }
      basis->factors_ = std::move(pairs);
    }
  } else {
    const Eigen::MatrixXd L = Eigen::MatrixXd(d.laplacian());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L);
    if (solver.info() != Eigen::Success) {
      const Eigen::MatrixXd& V = solver.eigenvectors();
      const double residual = (L * V - V * solver.eigenvalues().asDiagonal()).norm();
      throw std::runtime_error("eigendecompose: dense eigensolver did not converge (residual " +
                               std::to_string(residual) + ")");
    }
    basis->eigenvalues_ = solver.eigenvalues().head(static_cast<Eigen::Index>(count));
    basis->modes_ = solver.eigenvectors().leftCols(static_cast<Eigen::Index>(count)) /
                    std::sqrt(d.cell_volume());
    fix_signs(basis->modes_);
  }
  if (basis->eigenvalues_[0] <= 0.0) {
    throw std::runtime_error("eigendecompose: non-positive first eigenvalue");
  }
  return basis;
}

Eigen::VectorXd EigenBasis::mode(std::size_t k) const {
  if (k >= size()) throw std::out_of_range("EigenBasis::mode: index out of range");
  if (!separable_) return modes_.col(static_cast<Eigen::Index>(k));
  const auto [i, j] = factors_[k];
  if (domain_->dim() == 1) return line_modes_[0].col(i);
  const Eigen::VectorXd& px = line_modes_[0].col(i);
  const Eigen::VectorXd& py = line_modes_[1].col(j);
  Eigen::VectorXd out(px.size() * py.size());
  for (Eigen::Index b = 0; b < py.size(); ++b) out.segment(b * px.size(), px.size()) = px * py[b];
  return out;
}

Eigen::VectorXd EigenBasis::analyze(const Eigen::VectorXd& nodal) const {
  if (static_cast<std::size_t>(nodal.size()) != domain_->interior_count()) {
    throw std::invalid_argument("project: field has " + std::to_string(nodal.size()) +
                                " values but the domain has " +
                                std::to_string(domain_->interior_count()) + " interior nodes");
  }
  const double w = domain_->cell_volume();
  if (!separable_) return w * (modes_.transpose() * nodal);
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  if (domain_->dim() == 1) {
    const Eigen::VectorXd full = w * (line_modes_[0].transpose() * nodal);
    for (std::size_t k = 0; k < size(); ++k) out[static_cast<Eigen::Index>(k)] = full[factors_[k].first];
    return out;
  }
  const Eigen::Index m = line_modes_[0].rows();
  Eigen::Map<const Eigen::MatrixXd> F(nodal.data(), m, m);
  const Eigen::MatrixXd C = w * (line_modes_[0].transpose() * F * line_modes_[1]);
  for (std::size_t k = 0; k < size(); ++k) out[static_cast<Eigen::Index>(k)] = C(factors_[k].first, factors_[k].second);
  return out;
}

Eigen::VectorXd EigenBasis::synthesize(const Eigen::VectorXd& coefficients) const {
  if (static_cast<std::size_t>(coefficients.size()) != size()) {
    throw std::invalid_argument("synthesize: coefficient count does not match basis size");
  }
  if (!separable_) return modes_ * coefficients;
  if (domain_->dim() == 1) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(line_modes_[0].cols());
    for (std::size_t k = 0; k < size(); ++k) full[factors_[k].first] = coefficients[static_cast<Eigen::Index>(k)];
    return line_modes_[0] * full;
  }
  const Eigen::Index m = line_modes_[0].rows();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t k = 0; k < size(); ++k) C(factors_[k].first, factors_[k].second) = coefficients[static_cast<Eigen::Index>(k)];
  Eigen::MatrixXd F = line_modes_[0] * C * line_modes_[1].transpose();
  return Eigen::Map<const Eigen::VectorXd>(F.data(), F.size());
}

double EigenBasis::eigen_residual() const {
  const Eigen::SparseMatrix<double> L = domain_->laplacian();
  double worst = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    const Eigen::VectorXd phi = mode(k);
    const double r = (L * phi - eigenvalue(k) * phi).norm() / phi.norm();
    worst = std::max(worst, r);
  }
  return worst;
}

}  // namespace fracplasma
