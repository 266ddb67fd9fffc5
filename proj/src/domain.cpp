#include "fracplasma/domain.hpp"

#include <cmath>
#include <stdexcept>

namespace fracplasma {

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Interval:
      return "interval";
    case ShapeKind::Rectangle:
      return "rectangle";
    case ShapeKind::Disk:
      return "disk";
  }
  return "unknown";
}

ShapeSpec ShapeSpec::interval(double a, double b) {
  ShapeSpec s;
  s.kind = ShapeKind::Interval;
  s.lo = {a, 0.0};
  s.hi = {b, 0.0};
  s.center = {0.5 * (a + b), 0.0};
  return s;
}

ShapeSpec ShapeSpec::rectangle(Point lo, Point hi) {
  ShapeSpec s;
  s.kind = ShapeKind::Rectangle;
  s.lo = lo;
  s.hi = hi;
  s.center = {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])};
  return s;
}

ShapeSpec ShapeSpec::disk(Point lo, Point hi, Point center, double radius) {
  ShapeSpec s;
  s.kind = ShapeKind::Disk;
  s.lo = lo;
  s.hi = hi;
  s.center = center;
  s.radius = radius;
  return s;
}

Domain Domain::build(const ShapeSpec& shape, int nodes_per_axis) {
  if (nodes_per_axis < 3) {
    throw std::invalid_argument("build_domain: need at least 3 nodes per axis, got " +
                                std::to_string(nodes_per_axis));
  }
  const int dim = shape.dim();
  for (int ax = 0; ax < dim; ++ax) {
    if (!(shape.hi[ax] > shape.lo[ax])) {
      throw std::invalid_argument("build_domain: bounding box has non-positive extent on axis " +
                                  std::to_string(ax));
    }
  }
  if (shape.kind == ShapeKind::Disk && !(shape.radius > 0.0)) {
    throw std::invalid_argument("build_domain: disk radius must be positive");
  }

  Domain d;
  d.shape_ = shape;
  d.n_ = nodes_per_axis;
  for (int ax = 0; ax < dim; ++ax) d.h_[ax] = (shape.hi[ax] - shape.lo[ax]) / (nodes_per_axis - 1);

  const std::size_t total = dim == 1 ? static_cast<std::size_t>(d.n_)
                                     : static_cast<std::size_t>(d.n_) * static_cast<std::size_t>(d.n_);
  d.flags_.assign(total, 0);
  d.slot_.assign(total, -1);
  for (std::size_t g = 0; g < total; ++g) {
    const auto ij = d.grid_coords(g);
    bool on_box_edge = ij[0] == 0 || ij[0] == d.n_ - 1;
    if (dim == 2) on_box_edge = on_box_edge || ij[1] == 0 || ij[1] == d.n_ - 1;
    if (on_box_edge) continue;
    bool inside = true;
    if (shape.kind == ShapeKind::Disk) {
      const Point p = d.position(g);
      const double dx = p[0] - shape.center[0];
      const double dy = p[1] - shape.center[1];
      inside = dx * dx + dy * dy < shape.radius * shape.radius;
    }
    if (inside) {
      d.flags_[g] = 1;
      d.slot_[g] = static_cast<std::ptrdiff_t>(d.interior_.size());
      d.interior_.push_back(g);
    }
  }
  if (d.interior_.empty()) {
    throw std::invalid_argument("build_domain: mask excludes every node (empty interior)");
  }
  for (int ax = 0; ax < dim; ++ax) {
    if (d.is_symmetric(ax)) d.symmetry_axes_.push_back(ax);
  }
  return d;
}

double Domain::max_spacing() const { return dim() == 1 ? h_[0] : std::max(h_[0], h_[1]); }

double Domain::cell_volume() const { return dim() == 1 ? h_[0] : h_[0] * h_[1]; }

std::array<int, 2> Domain::grid_coords(std::size_t grid_index) const {
  if (dim() == 1) return {static_cast<int>(grid_index), 0};
  return {static_cast<int>(grid_index % static_cast<std::size_t>(n_)),
          static_cast<int>(grid_index / static_cast<std::size_t>(n_))};
}

std::size_t Domain::grid_index(int i, int j) const {
  return static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * static_cast<std::size_t>(n_);
}

Point Domain::position(std::size_t grid_index) const {
  const auto ij = grid_coords(grid_index);
  Point p{shape_.lo[0] + ij[0] * h_[0], 0.0};
  if (dim() == 2) p[1] = shape_.lo[1] + ij[1] * h_[1];
  return p;
}

Eigen::VectorXd Domain::embed(const Eigen::VectorXd& interior_values) const {
  if (static_cast<std::size_t>(interior_values.size()) != interior_.size()) {
    throw std::invalid_argument("embed: field size does not match interior node count");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid_size()));
  for (std::size_t k = 0; k < interior_.size(); ++k) out[static_cast<Eigen::Index>(interior_[k])] = interior_values[static_cast<Eigen::Index>(k)];
  return out;
}

Eigen::VectorXd Domain::restrict_to_interior(const Eigen::VectorXd& grid_values) const {
  if (static_cast<std::size_t>(grid_values.size()) != grid_size()) {
    throw std::invalid_argument("restrict_to_interior: field size does not match grid size");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(interior_.size()));
  for (std::size_t k = 0; k < interior_.size(); ++k) out[static_cast<Eigen::Index>(k)] = grid_values[static_cast<Eigen::Index>(interior_[k])];
  return out;
}

Eigen::SparseMatrix<double> Domain::laplacian() const {
  const auto n_int = static_cast<Eigen::Index>(interior_.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(interior_.size() * (1 + 2 * static_cast<std::size_t>(dim())));
  for (std::size_t k = 0; k < interior_.size(); ++k) {
    const auto ij = grid_coords(interior_[k]);
    const auto row = static_cast<Eigen::Index>(k);
    double diag = 0.0;
    for (int ax = 0; ax < dim(); ++ax) {
      const double w = 1.0 / (h_[ax] * h_[ax]);
      diag += 2.0 * w;
      for (int step : {-1, 1}) {
        auto nb = ij;
        nb[ax] += step;
        const std::size_t g = grid_index(nb[0], nb[1]);
        if (slot_[g] >= 0) trip.emplace_back(row, static_cast<Eigen::Index>(slot_[g]), -w);
      }
    }
    trip.emplace_back(row, row, diag);
  }
  Eigen::SparseMatrix<double> L(n_int, n_int);
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

Eigen::VectorXd Domain::apply_laplacian(const Eigen::VectorXd& interior_values) const {
  const Eigen::VectorXd full = embed(interior_values);
  Eigen::VectorXd out(static_cast<Eigen::Index>(interior_.size()));
  for (std::size_t k = 0; k < interior_.size(); ++k) {
    const auto ij = grid_coords(interior_[k]);
    const double c = full[static_cast<Eigen::Index>(interior_[k])];
    double acc = 0.0;
    for (int ax = 0; ax < dim(); ++ax) {
      auto lo = ij, hi = ij;
      lo[ax] -= 1;
      hi[ax] += 1;
      acc += (2.0 * c - full[static_cast<Eigen::Index>(grid_index(lo[0], lo[1]))] -
              full[static_cast<Eigen::Index>(grid_index(hi[0], hi[1]))]) /
             (h_[ax] * h_[ax]);
    }
    out[static_cast<Eigen::Index>(k)] = acc;
  }
  return out;
}

bool Domain::is_symmetric(int axis) const {
  if (axis < 0 || axis >= dim()) return false;
  for (std::size_t g = 0; g < flags_.size(); ++g) {
    if (flags_[g] != flags_[reflect(g, axis)]) return false;
  }
  return true;
}

std::size_t Domain::reflect(std::size_t grid_index_in, int axis) const {
  auto ij = grid_coords(grid_index_in);
  ij[axis] = n_ - 1 - ij[axis];
  return grid_index(ij[0], ij[1]);
}

Eigen::VectorXd Domain::reflect_field(const Eigen::VectorXd& interior_values, int axis) const {
  if (!is_symmetric(axis)) throw std::invalid_argument("reflect_field: domain is not symmetric on this axis");
  Eigen::VectorXd out(interior_values.size());
  for (std::size_t k = 0; k < interior_.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] =
        interior_values[static_cast<Eigen::Index>(slot_[reflect(interior_[k], axis)])];
  }
  return out;
}

double Domain::inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
  return cell_volume() * f.dot(g);
}

double Domain::norm(const Eigen::VectorXd& f) const { return std::sqrt(inner(f, f)); }

}  // namespace fracplasma
