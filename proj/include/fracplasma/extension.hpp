#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracplasma/domain.hpp"
#include "fracplasma/fractional.hpp"

namespace fracplasma {

/// Heights 0 = y_0 < y_1 < ... < y_M = Y with y_j = Y (j/M)^g.
struct YMesh {
  double height = 1.0;
  int layers = 1;
  double grading = 1.0;
  std::vector<double> nodes;

  static YMesh graded(double height, int layers, double grading);
  /// max(2, 2/(1-a)): resolves the y^(1-a) boundary layer.
  static double default_grading(double a);

  double spacing(int j) const { return nodes[static_cast<std::size_t>(j) + 1] - nodes[static_cast<std::size_t>(j)]; }
  /// Index j with y_j <= y < y_{j+1}, clamped to [0, M-1].
  int locate(double y) const;
};

enum class ExtensionKind { SemiAnalytic, FiniteDifference, Synthetic };

std::string to_string(ExtensionKind kind);

/// Values of an extension w(x, y) on the full thin grid times the y-mesh,
/// with weight exponent a = 1 - 2s.
class ExtensionField {
 public:
  ExtensionField(std::shared_ptr<const Domain> domain, YMesh mesh, double s, ExtensionKind kind,
                 Eigen::MatrixXd values);

  const Domain& domain() const { return *domain_; }
  const std::shared_ptr<const Domain>& domain_ptr() const { return domain_; }
  const YMesh& mesh() const { return mesh_; }
  double s() const { return s_; }
  double a() const { return 1.0 - 2.0 * s_; }
  ExtensionKind kind() const { return kind_; }

  /// grid_size x (M + 1); column j is layer y_j.
  const Eigen::MatrixXd& values() const { return values_; }
  double at(std::size_t grid_index, int layer) const {
    return values_(static_cast<Eigen::Index>(grid_index), layer);
  }
  /// Full-grid thin trace w(., 0).
  Eigen::VectorXd thin_trace() const { return values_.col(0); }

  /// Multilinear interpolation; points outside the box are clamped to it.
  double interpolate(const Point& x, double y) const;

  /// Eigenvalue used to calibrate the Dirichlet-to-Neumann normalization.
  double calibration_eigenvalue() const { return calibration_eigenvalue_; }
  void set_calibration_eigenvalue(double lambda) { calibration_eigenvalue_ = lambda; }

  /// Number of mode-profile evaluations clamped to zero (argument overflow).
  std::size_t clamped_profiles() const { return clamped_profiles_; }
  void set_clamped_profiles(std::size_t n) { clamped_profiles_ = n; }

 private:
  std::shared_ptr<const Domain> domain_;
  YMesh mesh_;
  double s_;
  ExtensionKind kind_;
  Eigen::MatrixXd values_;
  double calibration_eigenvalue_ = 1.0;
  std::size_t clamped_profiles_ = 0;
};

/// psi_s(z) = 2^(1-s)/Gamma(s) z^s K_s(z); psi_s(0) = 1, decaying.
double mode_profile(double s, double z);
/// psi_s'(z) = -2^(1-s)/Gamma(s) z^s K_(1-s)(z).
double mode_profile_derivative(double s, double z);
/// Arguments above this are treated as exact zeros of the profile.
inline constexpr double kProfileCutoff = 700.0;

/// w(x, y) = sum a_k phi_k(x) psi_s(sqrt(lambda_k) y).
ExtensionField extend_semianalytic(const SpectralField& u, double s, const YMesh& mesh);

/// Finite-difference solution of div(y^a grad w) = 0 with Dirichlet data
/// `f` at y = 0 and zero on the lateral boundary and at y = Y. The x-part of
/// the scheme is the basis Laplacian, so the system is solved exactly by
/// diagonalizing in x (a complete basis is required) and running a
/// tridiagonal solve in y per mode.
ExtensionField extend_fd(const Eigen::VectorXd& f, const EigenBasis& basis, double s,
                         const YMesh& mesh);

/// Samples an analytic w(x, y) on the full grid.
ExtensionField sample_extension(std::shared_ptr<const Domain> domain, double s, const YMesh& mesh,
                                const std::function<double(const Point&, double)>& w);

/// Discrete weighted Dirichlet form of the finite-difference scheme:
/// sum_j omega_j |grad_x w_j|_h^2 + sum_j kappa_j |w_{j+1} - w_j|_h^2.
double weighted_energy(const ExtensionField& w);

/// Exact-weight face integrals of the scheme on this mesh.
struct SchemeWeights {
  std::vector<double> face;   // m_j = int_{y_j}^{y_{j+1}} y^a dy
  std::vector<double> lumped; // omega_j = (m_{j-1} + m_j) / 2
};
SchemeWeights scheme_weights(const YMesh& mesh, double a);

/// Coefficient b of y^(1-a) in the series fit
/// w(y) - w(0) = b y^(1-a) + c y^2 + d y^(3-a) + e y^4 on the first layers.
class SeriesFit {
 public:
  SeriesFit(const YMesh& mesh, double s);
  int layers_used() const { return static_cast<int>(row_.size()); }
  /// values[j] = w(y_j) for j = 0..layers_used().
  double leading(const std::vector<double>& values) const;

 private:
  std::vector<double> row_;
  double scale_ = 1.0;
};

/// Normalization C with dtn = -C b, calibrated so that mode psi_s(sqrt(mu) y)
/// with mu = w.calibration_eigenvalue() maps exactly to mu^s.
double dtn_normalization(const ExtensionField& w);
/// lim y^a w_y = -flux_scale * dtn; equals 2s / C.
double flux_scale(const ExtensionField& w);

/// Thin-space flux density on interior nodes; equals (-Delta)^s on the thin
/// space.
Eigen::VectorXd dtn(const ExtensionField& w);

struct SignReport {
  double max_derivative = 0.0;
  struct Node {
    std::size_t grid_index;
    int layer;
    double derivative;
  };
  std::vector<Node> violators;
  std::size_t checked = 0;
};
/// One-sided y-differences on every node; violators exceed `tol`.
SignReport check_uy_sign(const ExtensionField& w, double tol);

struct TraceReport {
  double radius = 0.0;
  double boundary_norm = 0.0;  // int_{(dB_r)^+} y^a w^2
  double thin_norm = 0.0;      // int_{B'_r} w^2
  double energy = 0.0;         // int_{B_r^+} y^a |grad w|^2
  double boundary_ratio = 0.0; // boundary_norm / (r energy)
  double thin_ratio = 0.0;     // thin_norm / (r^(1-a) energy)
};
TraceReport trace_norms(const ExtensionField& w, const Point& center, double r);

/// lim_{y->0} (w(x0, y) - w(x0, 0)) / y^(1-a) from the series fit. Requires
/// w >= w(x0, 0) on the half ball of `radius` (0 selects 10 grid cells) and
/// w non-constant there.
double hopf_ratio(const ExtensionField& w, const Point& x0, double radius = 0.0);

}  // namespace fracplasma
