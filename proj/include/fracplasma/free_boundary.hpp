#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracplasma/domain.hpp"

namespace fracplasma {

enum class PointTag { Regular, SingularCandidate, Unresolved };

std::string to_string(PointTag tag);

struct BoundaryPoint {
  Point x{0.0, 0.0};
  Point gradient{0.0, 0.0};
  double gradient_norm = 0.0;
  /// |grad u| must exceed this for the point to count as regular.
  double threshold = 0.0;
  PointTag tag = PointTag::Unresolved;
};

/// Level set {u = level} of a thin field. In 1D the points are the linearly
/// interpolated crossings of each sign-change cell; in 2D they are the
/// marching-squares edge crossings, linked into chains. "Sign change" means
/// u - level > 0 at one end and <= 0 at the other.
struct FreeBoundary {
  double level = 0.0;
  std::vector<BoundaryPoint> points;
  /// 2D: point indices along each contour; closed chains repeat the first index.
  std::vector<std::vector<std::size_t>> chains;
  /// Cells (lower-left grid index) cut by the level set.
  std::vector<std::size_t> cells;
  /// Cells where u == level at every corner.
  std::vector<std::size_t> degenerate_cells;

  bool empty() const { return points.empty(); }
};

/// `values` is either an interior field or a full-grid field.
FreeBoundary extract_free_boundary(const Domain& domain, const Eigen::VectorXd& values, double level);

/// Full-grid central-difference gradient of a full-grid field.
std::vector<Point> nodal_gradient(const Domain& domain, const Eigen::VectorXd& grid_values);
/// Full-grid max |second difference| (pure and mixed) of a full-grid field.
Eigen::VectorXd nodal_hessian_bound(const Domain& domain, const Eigen::VectorXd& grid_values);

struct GradientEstimate {
  Point gradient{0.0, 0.0};
  double norm = 0.0;
  /// 10 h max |D^2 u| over the nodes within 3h of the point.
  double threshold = 0.0;
};
/// Interpolated central-difference gradient of a thin field at x.
GradientEstimate gradient_estimate(const Domain& domain, const Eigen::VectorXd& values, const Point& x);

struct InclusionReport {
  std::size_t checked = 0;
  std::vector<Point> violations;
  bool passed() const { return violations.empty(); }
};

/// Every point of the boundary of {u < level} must have a point of the
/// boundary of {u > level} within one grid cell.
InclusionReport check_boundary_inclusion(const Domain& domain, const Eigen::VectorXd& values, double level);

struct SubharmonicReport {
  std::size_t nodes = 0;
  double min_laplacian = 0.0;
  Point argmin{0.0, 0.0};
  bool passed() const { return nodes > 0 && min_laplacian > 0.0; }
};

/// Minimum of the discrete thin Laplacian over interior nodes within 2h of
/// {u = level}. Throws std::invalid_argument unless s > 1/2.
SubharmonicReport check_subharmonic_strip(const Domain& domain, const Eigen::VectorXd& values, double level,
                                          double s);

}  // namespace fracplasma
