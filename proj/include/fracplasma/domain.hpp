#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace fracplasma {

using Point = std::array<double, 2>;

enum class ShapeKind { Interval, Rectangle, Disk };

std::string to_string(ShapeKind kind);

/// Geometric description of a bounded domain. The bounding box [lo, hi] is
/// always gridded; a disk is a mask inside its bounding box.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::Interval;
  Point lo{0.0, 0.0};
  Point hi{1.0, 1.0};
  Point center{0.5, 0.5};
  double radius = 0.0;

  static ShapeSpec interval(double a, double b);
  static ShapeSpec rectangle(Point lo, Point hi);
  static ShapeSpec disk(Point lo, Point hi, Point center, double radius);

  int dim() const { return kind == ShapeKind::Interval ? 1 : 2; }
};

/// Uniform tensor grid over the bounding box with interior/boundary flags.
///
/// Grid nodes are indexed lexicographically with axis 0 fastest. Thin nodal
/// fields (the unknowns of every spectral operation) live on the interior
/// nodes only, in increasing grid-index order; full-grid fields carry one
/// value per grid node.
class Domain {
 public:
  static Domain build(const ShapeSpec& shape, int nodes_per_axis);

  const ShapeSpec& shape() const { return shape_; }
  int dim() const { return shape_.dim(); }
  int nodes_per_axis() const { return n_; }
  double spacing(int axis) const { return h_[axis]; }
  /// Largest grid spacing over the active axes.
  double max_spacing() const;
  /// Volume weight of one node in the discrete inner product.
  double cell_volume() const;

  std::size_t grid_size() const { return flags_.size(); }
  std::size_t interior_count() const { return interior_.size(); }
  bool is_interior(std::size_t grid_index) const { return slot_[grid_index] >= 0; }
  const std::vector<std::size_t>& interior_nodes() const { return interior_; }
  /// Position of a grid node in the interior ordering, or -1.
  std::ptrdiff_t interior_slot(std::size_t grid_index) const { return slot_[grid_index]; }

  std::array<int, 2> grid_coords(std::size_t grid_index) const;
  std::size_t grid_index(int i, int j = 0) const;
  Point position(std::size_t grid_index) const;

  /// Full-grid field from interior values, zero on boundary nodes.
  Eigen::VectorXd embed(const Eigen::VectorXd& interior_values) const;
  /// Interior values of a full-grid field.
  Eigen::VectorXd restrict_to_interior(const Eigen::VectorXd& grid_values) const;

  /// Standard second-difference Dirichlet Laplacian on interior nodes
  /// (positive definite, i.e. the discrete -Laplacian).
  Eigen::SparseMatrix<double> laplacian() const;
  Eigen::VectorXd apply_laplacian(const Eigen::VectorXd& interior_values) const;

  /// Axes across whose mid-hyperplane the interior mask is mirror symmetric.
  const std::vector<int>& symmetry_axes() const { return symmetry_axes_; }
  bool is_symmetric(int axis) const;
  /// Grid index of the mirror image across the mid-hyperplane of `axis`.
  std::size_t reflect(std::size_t grid_index, int axis) const;
  /// Mirror an interior field across the mid-hyperplane of `axis`.
  Eigen::VectorXd reflect_field(const Eigen::VectorXd& interior_values, int axis) const;

  /// Discrete inner product h^dim * sum f g over interior nodes.
  double inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;
  double norm(const Eigen::VectorXd& f) const;

 private:
  ShapeSpec shape_;
  int n_ = 0;
  std::array<double, 2> h_{0.0, 0.0};
  std::vector<unsigned char> flags_;  // 1 = interior
  std::vector<std::ptrdiff_t> slot_;
  std::vector<std::size_t> interior_;
  std::vector<int> symmetry_axes_;
};

}  // namespace fracplasma
