#include "fracplasma/free_boundary.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace fracplasma {

std::string to_string(PointTag tag) {
  switch (tag) {
    case PointTag::Regular:
      return "regular";
    case PointTag::SingularCandidate:
      return "singular_candidate";
    case PointTag::Unresolved:
      return "unresolved";
  }
  return "unknown";
}

namespace {

Eigen::VectorXd full_grid(const Domain& d, const Eigen::VectorXd& values) {
  if (static_cast<std::size_t>(values.size()) == d.grid_size()) return values;
  if (static_cast<std::size_t>(values.size()) == d.interior_count()) return d.embed(values);
  throw std::invalid_argument("free boundary: field size matches neither the grid nor the interior");
}

Eigen::VectorXd interior_values(const Domain& d, const Eigen::VectorXd& values) {
  if (static_cast<std::size_t>(values.size()) == d.interior_count()) return values;
  if (static_cast<std::size_t>(values.size()) == d.grid_size()) return d.restrict_to_interior(values);
  throw std::invalid_argument("free boundary: field size matches neither the grid nor the interior");
}

struct Crossing {
  Point x;
  std::size_t g0;
  std::size_t g1;
  double t;
};

// Crossings of every grid edge whose end values differ in `pred`.
template <class Pred>
std::vector<Crossing> edge_crossings(const Domain& d, const Eigen::VectorXd& f, Pred pred) {
  std::vector<Crossing> out;
  const int n = d.nodes_per_axis();
  for (std::size_t g = 0; g < d.grid_size(); ++g) {
    const auto ij = d.grid_coords(g);
    for (int ax = 0; ax < d.dim(); ++ax) {
      if (ij[ax] + 1 >= n) continue;
      auto nb = ij;
      nb[ax] += 1;
      const std::size_t g1 = d.grid_index(nb[0], nb[1]);
      const double f0 = f[static_cast<Eigen::Index>(g)];
      const double f1 = f[static_cast<Eigen::Index>(g1)];
      if (pred(f0) == pred(f1)) continue;
      const double t = f0 / (f0 - f1);
      Point x = d.position(g);
      x[ax] += t * d.spacing(ax);
      out.push_back({x, g, g1, t});
    }
  }
  return out;
}

double local_threshold(const Domain& d, const Eigen::VectorXd& hess, const Point& x) {
  const double h = d.max_spacing();
  const int n = d.nodes_per_axis();
  std::array<int, 2> lo{0, 0}, hi{0, 0};
  for (int ax = 0; ax < d.dim(); ++ax) {
    const double t = (x[ax] - d.shape().lo[ax]) / d.spacing(ax);
    lo[ax] = std::clamp(static_cast<int>(std::floor(t)) - 3, 0, n - 1);
    hi[ax] = std::clamp(static_cast<int>(std::ceil(t)) + 3, 0, n - 1);
  }
  double bound = 0.0;
  for (int j = lo[1]; j <= hi[1]; ++j) {
    for (int i = lo[0]; i <= hi[0]; ++i) {
      const std::size_t g = d.grid_index(i, j);
      const Point p = d.position(g);
      double dist = 0.0;
      for (int ax = 0; ax < d.dim(); ++ax) dist = std::max(dist, std::abs(p[ax] - x[ax]));
      if (dist <= 3.0 * h * (1.0 + 1e-12)) bound = std::max(bound, hess[static_cast<Eigen::Index>(g)]);
    }
  }
  return 10.0 * h * bound;
}

}  // namespace

std::vector<Point> nodal_gradient(const Domain& d, const Eigen::VectorXd& u) {
  const int n = d.nodes_per_axis();
  std::vector<Point> grad(d.grid_size(), Point{0.0, 0.0});
  for (std::size_t g = 0; g < d.grid_size(); ++g) {
    const auto ij = d.grid_coords(g);
    for (int ax = 0; ax < d.dim(); ++ax) {
      auto lo = ij, hi = ij;
      lo[ax] = std::max(ij[ax] - 1, 0);
      hi[ax] = std::min(ij[ax] + 1, n - 1);
      const double diff = u[static_cast<Eigen::Index>(d.grid_index(hi[0], hi[1]))] -
                          u[static_cast<Eigen::Index>(d.grid_index(lo[0], lo[1]))];
      grad[g][ax] = diff / ((hi[ax] - lo[ax]) * d.spacing(ax));
    }
  }
  return grad;
}

Eigen::VectorXd nodal_hessian_bound(const Domain& d, const Eigen::VectorXd& u) {
  const int n = d.nodes_per_axis();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.grid_size()));
  auto at = [&](int i, int j) { return u[static_cast<Eigen::Index>(d.grid_index(i, j))]; };
  for (std::size_t g = 0; g < d.grid_size(); ++g) {
    const auto [i, j] = d.grid_coords(g);
    double bound = 0.0;
    if (i > 0 && i < n - 1) {
      const double h = d.spacing(0);
      bound = std::max(bound, std::abs(at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (h * h));
    }
    if (d.dim() == 2) {
      if (j > 0 && j < n - 1) {
        const double h = d.spacing(1);
        bound = std::max(bound, std::abs(at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (h * h));
      }
      if (i > 0 && i < n - 1 && j > 0 && j < n - 1) {
        const double mixed = at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1);
        bound = std::max(bound, std::abs(mixed) / (4.0 * d.spacing(0) * d.spacing(1)));
      }
    }
    out[static_cast<Eigen::Index>(g)] = bound;
  }
  return out;
}

FreeBoundary extract_free_boundary(const Domain& d, const Eigen::VectorXd& values, double level) {
  const Eigen::VectorXd u = full_grid(d, values);
  const Eigen::VectorXd f = (u.array() - level).matrix();
  const std::vector<Point> grad = nodal_gradient(d, u);
  const Eigen::VectorXd hess = nodal_hessian_bound(d, u);
  const int n = d.nodes_per_axis();
  auto positive = [](double v) { return v > 0.0; };

  FreeBoundary fb;
  fb.level = level;
  const std::vector<Crossing> crossings = edge_crossings(d, f, positive);
  std::unordered_map<std::size_t, std::size_t> by_edge;  // 2 g0 + axis -> point
  for (const Crossing& c : crossings) {
    BoundaryPoint p;
    p.x = c.x;
    for (int ax = 0; ax < d.dim(); ++ax) p.gradient[ax] = (1.0 - c.t) * grad[c.g0][ax] + c.t * grad[c.g1][ax];
    p.gradient_norm = std::hypot(p.gradient[0], p.gradient[1]);
    p.threshold = local_threshold(d, hess, p.x);
    p.tag = p.gradient_norm > p.threshold ? PointTag::Regular : PointTag::Unresolved;
    const int axis = (d.dim() == 2 && d.grid_coords(c.g1)[1] != d.grid_coords(c.g0)[1]) ? 1 : 0;
    by_edge[2 * c.g0 + static_cast<std::size_t>(axis)] = fb.points.size();
    fb.points.push_back(p);
  }

  auto fval = [&](int i, int j) { return f[static_cast<Eigen::Index>(d.grid_index(i, j))]; };
  if (d.dim() == 1) {
    for (int i = 0; i + 1 < n; ++i) {
      const double f0 = fval(i, 0), f1 = fval(i + 1, 0);
      if (f0 == 0.0 && f1 == 0.0) fb.degenerate_cells.push_back(d.grid_index(i));
      if (positive(f0) != positive(f1)) fb.cells.push_back(d.grid_index(i));
    }
    return fb;
  }

  std::vector<std::vector<std::size_t>> adjacency(fb.points.size());
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      const std::array<double, 4> c{fval(i, j), fval(i + 1, j), fval(i + 1, j + 1), fval(i, j + 1)};
      if (c[0] == 0.0 && c[1] == 0.0 && c[2] == 0.0 && c[3] == 0.0) fb.degenerate_cells.push_back(d.grid_index(i, j));
      // Edges: bottom, right, top, left.
      const std::array<std::size_t, 4> key{2 * d.grid_index(i, j), 2 * d.grid_index(i + 1, j) + 1,
                                           2 * d.grid_index(i, j + 1), 2 * d.grid_index(i, j) + 1};
      std::array<long, 4> pt{-1, -1, -1, -1};
      int count = 0;
      for (int e = 0; e < 4; ++e) {
        const auto it = by_edge.find(key[static_cast<std::size_t>(e)]);
        if (it != by_edge.end()) {
          pt[static_cast<std::size_t>(e)] = static_cast<long>(it->second);
          ++count;
        }
      }
      if (count == 0) continue;
      fb.cells.push_back(d.grid_index(i, j));
      auto link = [&](int e0, int e1) {
        const auto p = static_cast<std::size_t>(pt[static_cast<std::size_t>(e0)]);
        const auto q = static_cast<std::size_t>(pt[static_cast<std::size_t>(e1)]);
        adjacency[p].push_back(q);
        adjacency[q].push_back(p);
      };
      if (count == 2) {
        int first = -1;
        for (int e = 0; e < 4; ++e) {
          if (pt[static_cast<std::size_t>(e)] < 0) continue;
          if (first < 0) {
            first = e;
          } else {
            link(first, e);
          }
        }
      } else if (count == 4) {
        const double center = 0.25 * (c[0] + c[1] + c[2] + c[3]);
        if (positive(center) == positive(c[0])) {
          link(0, 1);
          link(2, 3);
        } else {
          link(3, 0);
          link(1, 2);
        }
      }
    }
  }

  std::vector<bool> used(fb.points.size(), false);
  auto walk = [&](std::size_t startp) {
    std::vector<std::size_t> chain{startp};
    used[startp] = true;
    std::size_t cur = startp;
    while (true) {
      std::size_t next = cur;
      for (std::size_t nb : adjacency[cur]) {
        if (!used[nb]) {
          next = nb;
          break;
        }
      }
      if (next == cur) break;
      used[next] = true;
      chain.push_back(next);
      cur = next;
    }
    if (chain.size() > 2 &&
        std::find(adjacency[cur].begin(), adjacency[cur].end(), startp) != adjacency[cur].end()) {
      chain.push_back(startp);
    }
    fb.chains.push_back(std::move(chain));
  };
  for (std::size_t p = 0; p < fb.points.size(); ++p) {
    if (!used[p] && adjacency[p].size() <= 1) walk(p);
  }
  for (std::size_t p = 0; p < fb.points.size(); ++p) {
    if (!used[p]) walk(p);
  }
  return fb;
}

GradientEstimate gradient_estimate(const Domain& d, const Eigen::VectorXd& values, const Point& x) {
  const Eigen::VectorXd u = full_grid(d, values);
  const std::vector<Point> grad = nodal_gradient(d, u);
  const int n = d.nodes_per_axis();
  std::array<int, 2> cell{0, 0};
  std::array<double, 2> xi{0.0, 0.0};
  for (int ax = 0; ax < d.dim(); ++ax) {
    const double t = (x[ax] - d.shape().lo[ax]) / d.spacing(ax);
    cell[ax] = std::clamp(static_cast<int>(std::floor(t)), 0, n - 2);
    xi[ax] = std::clamp(t - cell[ax], 0.0, 1.0);
  }
  GradientEstimate est;
  for (int ax = 0; ax < d.dim(); ++ax) {
    if (d.dim() == 1) {
      est.gradient[ax] = (1.0 - xi[0]) * grad[d.grid_index(cell[0])][ax] + xi[0] * grad[d.grid_index(cell[0] + 1)][ax];
    } else {
      const auto g = [&](int di, int dj) { return grad[d.grid_index(cell[0] + di, cell[1] + dj)][ax]; };
      est.gradient[ax] = (1.0 - xi[1]) * ((1.0 - xi[0]) * g(0, 0) + xi[0] * g(1, 0)) +
                         xi[1] * ((1.0 - xi[0]) * g(0, 1) + xi[0] * g(1, 1));
    }
  }
  est.norm = std::hypot(est.gradient[0], est.gradient[1]);
  est.threshold = local_threshold(d, nodal_hessian_bound(d, u), x);
  return est;
}

InclusionReport check_boundary_inclusion(const Domain& d, const Eigen::VectorXd& values, double level) {
  const Eigen::VectorXd f = (full_grid(d, values).array() - level).matrix();
  const auto below = edge_crossings(d, f, [](double v) { return v < 0.0; });
  const auto above = edge_crossings(d, f, [](double v) { return v > 0.0; });
  InclusionReport report;
  const double reach = d.max_spacing() * (1.0 + 1e-9);
  for (const Crossing& b : below) {
    ++report.checked;
    bool found = false;
    for (const Crossing& a : above) {
      if (std::abs(a.x[0] - b.x[0]) <= reach && std::abs(a.x[1] - b.x[1]) <= reach) {
        found = true;
        break;
      }
    }
    if (!found) report.violations.push_back(b.x);
  }
  return report;
}

SubharmonicReport check_subharmonic_strip(const Domain& d, const Eigen::VectorXd& values, double level, double s) {
  if (!(s > 0.5)) {
    throw std::invalid_argument("check_subharmonic_strip: requires s > 1/2, got s = " + std::to_string(s));
  }
  const Eigen::VectorXd interior = interior_values(d, values);
  const FreeBoundary fb = extract_free_boundary(d, interior, level);
  const Eigen::VectorXd lap = -d.apply_laplacian(interior);
  const double reach = 2.0 * d.max_spacing() * (1.0 + 1e-9);
  SubharmonicReport report;
  report.min_laplacian = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < d.interior_count(); ++k) {
    const Point x = d.position(d.interior_nodes()[k]);
    bool near = false;
    for (const BoundaryPoint& p : fb.points) {
      if (std::hypot(p.x[0] - x[0], p.x[1] - x[1]) <= reach) {
        near = true;
        break;
      }
    }
    if (!near) continue;
    ++report.nodes;
    const double v = lap[static_cast<Eigen::Index>(k)];
    if (v < report.min_laplacian) {
      report.min_laplacian = v;
      report.argmin = x;
    }
  }
  if (report.nodes == 0) report.min_laplacian = 0.0;
  return report;
}

}  // namespace fracplasma
