#include "fracplasma/half_ball.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fracplasma/quadrature.hpp"

namespace fracplasma {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Cells [i, i+1] of one axis that meet [c - r, c + r].
std::pair<int, int> cell_range(const Domain& d, int axis, double c, double r) {
  const double lo = d.shape().lo[axis];
  const double h = d.spacing(axis);
  const int n = d.nodes_per_axis();
  const int first = std::clamp(static_cast<int>(std::floor((c - r - lo) / h)), 0, n - 2);
  const int last = std::clamp(static_cast<int>(std::ceil((c + r - lo) / h)) - 1, 0, n - 2);
  return {first, last};
}

// int_{y_j}^{top} y^a [((1-eta) A + eta B)^2 + c^2] dy, eta = (y - y_j)/dy.
double layer_integral(const WeightedMoments& m, double A, double B, double c) {
  return A * A * (m.m0 - 2.0 * m.m1 + m.m2) + 2.0 * A * B * (m.m1 - m.m2) + B * B * m.m2 + c * c * m.m0;
}

// Moments of every full layer; only the layer cut by the sphere needs new ones.
struct LayerTable {
  const YMesh& mesh;
  double a;
  std::vector<WeightedMoments> full;

  LayerTable(const YMesh& m, double a_) : mesh(m), a(a_) {
    full.reserve(static_cast<std::size_t>(m.layers));
    for (int j = 0; j < m.layers; ++j) {
      const double yj = m.nodes[static_cast<std::size_t>(j)];
      full.push_back(weighted_moments(yj, m.nodes[static_cast<std::size_t>(j) + 1], yj, m.spacing(j), a));
    }
  }

  WeightedMoments get(int j, double top) const {
    const double y1 = mesh.nodes[static_cast<std::size_t>(j) + 1];
    if (top >= y1) return full[static_cast<std::size_t>(j)];
    const double yj = mesh.nodes[static_cast<std::size_t>(j)];
    return weighted_moments(yj, top, yj, mesh.spacing(j), a);
  }
};

double energy_1d(const ExtensionField& w, double x0, double r) {
  const Domain& d = w.domain();
  const YMesh& mesh = w.mesh();
  const double a = w.a();
  const double h = d.spacing(0);
  const double lo = d.shape().lo[0];
  static const QuadratureRule gl = gauss_unit(8);
  const auto [first, last] = cell_range(d, 0, x0, r);
  const LayerTable table(mesh, a);

  std::vector<double> breaks;
  double total = 0.0;
  for (int i = first; i <= last; ++i) {
    const double xl = lo + i * h;
    const double p = std::max(xl, x0 - r);
    const double q = std::min(xl + h, x0 + r);
    if (q <= p) continue;
    breaks.assign({p, q});
    for (int k = 0; k <= mesh.layers; ++k) {
      const double yk = mesh.nodes[static_cast<std::size_t>(k)];
      if (yk >= r) break;
      const double half = std::sqrt(r * r - yk * yk);
      for (double b : {x0 - half, x0 + half}) {
        if (b > p && b < q) breaks.push_back(b);
      }
    }
    std::sort(breaks.begin(), breaks.end());
    const std::size_t g0 = d.grid_index(i);
    for (std::size_t piece = 0; piece + 1 < breaks.size(); ++piece) {
      const double pl = breaks[piece];
      const double len = breaks[piece + 1] - pl;
      if (len <= 0.0) continue;
      for (std::size_t qn = 0; qn < gl.nodes.size(); ++qn) {
        const double x = pl + len * gl.nodes[qn];
        const double top = std::sqrt(std::max(r * r - (x - x0) * (x - x0), 0.0));
        const double xi = (x - xl) / h;
        double column = 0.0;
        for (int j = 0; j < mesh.layers; ++j) {
          const double yj = mesh.nodes[static_cast<std::size_t>(j)];
          if (yj >= top) break;
          const double dy = mesh.spacing(j);
          const double w00 = w.at(g0, j), w10 = w.at(g0 + 1, j);
          const double w01 = w.at(g0, j + 1), w11 = w.at(g0 + 1, j + 1);
          const double A = (w10 - w00) / h;
          const double B = (w11 - w01) / h;
          const double c = ((1.0 - xi) * (w01 - w00) + xi * (w11 - w10)) / dy;
          column += layer_integral(table.get(j, top), A, B, c);
        }
        total += gl.weights[qn] * len * column;
      }
    }
  }
  return total;
}

// Sub-cell tensor Gauss rule in the thin space, clipped to the disk.
constexpr int kSplit2d = 2;

double energy_2d(const ExtensionField& w, const Point& x0, double r) {
  const Domain& d = w.domain();
  const YMesh& mesh = w.mesh();
  const double a = w.a();
  const double h0 = d.spacing(0), h1 = d.spacing(1);
  static const QuadratureRule gl = gauss_unit(4);
  const auto [i0, i1] = cell_range(d, 0, x0[0], r);
  const auto [j0, j1] = cell_range(d, 1, x0[1], r);
  const LayerTable table(mesh, a);

  double total = 0.0;
  for (int cj = j0; cj <= j1; ++cj) {
    for (int ci = i0; ci <= i1; ++ci) {
      const double xl = d.shape().lo[0] + ci * h0;
      const double yl = d.shape().lo[1] + cj * h1;
      // Skip cells entirely outside the disk.
      const double nx = std::clamp(x0[0], xl, xl + h0) - x0[0];
      const double ny = std::clamp(x0[1], yl, yl + h1) - x0[1];
      if (nx * nx + ny * ny >= r * r) continue;
      const std::size_t g00 = d.grid_index(ci, cj);
      const std::size_t g01 = d.grid_index(ci, cj + 1);
      // Cells cut by the circle are split; the rest use one tensor rule.
      const double fx = std::max(std::abs(xl - x0[0]), std::abs(xl + h0 - x0[0]));
      const double fy = std::max(std::abs(yl - x0[1]), std::abs(yl + h1 - x0[1]));
      const int split = fx * fx + fy * fy < r * r ? 1 : kSplit2d;
      const double sub0 = h0 / split, sub1 = h1 / split;
      for (int s1 = 0; s1 < split; ++s1) {
        for (int s0 = 0; s0 < split; ++s0) {
          for (std::size_t q1 = 0; q1 < gl.nodes.size(); ++q1) {
            for (std::size_t q0 = 0; q0 < gl.nodes.size(); ++q0) {
              const double xi0 = (s0 + gl.nodes[q0]) / split;
              const double xi1 = (s1 + gl.nodes[q1]) / split;
              const double dx = xl + xi0 * h0 - x0[0];
              const double dz = yl + xi1 * h1 - x0[1];
              const double rho2 = dx * dx + dz * dz;
              if (rho2 >= r * r) continue;
              const double top = std::sqrt(r * r - rho2);
              double column = 0.0;
              for (int j = 0; j < mesh.layers; ++j) {
                const double yj = mesh.nodes[static_cast<std::size_t>(j)];
                if (yj >= top) break;
                const double dy = mesh.spacing(j);
                auto grads = [&](int layer, double& gx, double& gz) {
                  const double a00 = w.at(g00, layer), a10 = w.at(g00 + 1, layer);
                  const double a01 = w.at(g01, layer), a11 = w.at(g01 + 1, layer);
                  gx = ((1.0 - xi1) * (a10 - a00) + xi1 * (a11 - a01)) / h0;
                  gz = ((1.0 - xi0) * (a01 - a00) + xi0 * (a11 - a10)) / h1;
                };
                auto value = [&](int layer) {
                  const double a00 = w.at(g00, layer), a10 = w.at(g00 + 1, layer);
                  const double a01 = w.at(g01, layer), a11 = w.at(g01 + 1, layer);
                  return (1.0 - xi1) * ((1.0 - xi0) * a00 + xi0 * a10) + xi1 * ((1.0 - xi0) * a01 + xi0 * a11);
                };
                double ax, az, bx, bz;
                grads(j, ax, az);
                grads(j + 1, bx, bz);
                const double c = (value(j + 1) - value(j)) / dy;
                const WeightedMoments m = table.get(j, top);
                column += layer_integral(m, ax, bx, c) + layer_integral(m, az, bz, 0.0);
              }
              total += gl.weights[q0] * gl.weights[q1] * sub0 * sub1 * column;
            }
          }
        }
      }
    }
  }
  return total;
}

// int_0^pi sin^a(t) g(t) dt with Jacobi end panels absorbing the weight.
template <class G>
double sine_weighted(double a, double span, int panels, bool both_ends, const G& g) {
  static const QuadratureRule gl = gauss_unit(8);
  const QuadratureRule end = gauss_power_weight(8, a);
  const double width = span / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double t0 = p * width;
    const bool left_end = p == 0 && both_ends;
    const bool right_end = p == panels - 1;
    if (left_end) {
      // theta^a (sin(theta)/theta)^a near theta = 0.
      for (std::size_t q = 0; q < end.nodes.size(); ++q) {
        const double t = width * end.nodes[q];
        total += end.weights[q] * std::pow(width, 1.0 + a) * std::pow(std::sin(t) / t, a) * g(t);
      }
    } else if (right_end) {
      // Weight vanishes like (span - theta)^a at the far end.
      for (std::size_t q = 0; q < end.nodes.size(); ++q) {
        const double u = width * end.nodes[q];
        const double t = span - u;
        const double ratio = std::sin(u) / u;
        total += end.weights[q] * std::pow(width, 1.0 + a) * std::pow(ratio, a) * g(t);
      }
    } else {
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double t = t0 + width * gl.nodes[q];
        const double weight = both_ends ? std::sin(t) : std::cos(t);
        total += gl.weights[q] * width * std::pow(weight, a) * g(t);
      }
    }
  }
  return total;
}

}  // namespace

void require_half_ball_inside(const ExtensionField& w, const Point& center, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("half ball: radius must be positive");
  const Domain& d = w.domain();
  const double slack = 1e-12 * std::max(1.0, r);
  for (int ax = 0; ax < d.dim(); ++ax) {
    if (center[ax] - r < d.shape().lo[ax] - slack || center[ax] + r > d.shape().hi[ax] + slack) {
      throw std::invalid_argument("half ball: B_r leaves the computational box along axis " +
                                  std::to_string(ax));
    }
  }
  if (r > w.mesh().height + slack) {
    throw std::invalid_argument("half ball: radius exceeds the extension height");
  }
}

double half_ball_energy(const ExtensionField& w, const Point& center, double r) {
  require_half_ball_inside(w, center, r);
  return w.domain().dim() == 1 ? energy_1d(w, center[0], r) : energy_2d(w, center, r);
}

double half_sphere_norm(const ExtensionField& w, const Point& center, double r, double shift) {
  require_half_ball_inside(w, center, r);
  const Domain& d = w.domain();
  const double a = w.a();
  const double arc = 0.5 * d.max_spacing();
  if (d.dim() == 1) {
    const int panels = std::max(8, static_cast<int>(std::ceil(kPi * r / arc)));
    const double integral = sine_weighted(a, kPi, panels, true, [&](double t) {
      const double v = w.interpolate({center[0] + r * std::cos(t), 0.0}, r * std::sin(t)) - shift;
      return v * v;
    });
    return std::pow(r, 1.0 + a) * integral;
  }
  // Polar angle t from the y-axis: y = r cos t, weight cos^a t sin t.
  const int panels = std::max(4, static_cast<int>(std::ceil(0.5 * kPi * r / arc)));
  const int ring = std::max(16, static_cast<int>(std::ceil(2.0 * kPi * r / arc)));
  const double integral = sine_weighted(a, 0.5 * kPi, panels, false, [&](double t) {
    const double rho = r * std::sin(t);
    const double y = r * std::cos(t);
    double sum = 0.0;
    for (int k = 0; k < ring; ++k) {
      const double phi = 2.0 * kPi * k / ring;
      const double v = w.interpolate({center[0] + rho * std::cos(phi), center[1] + rho * std::sin(phi)}, y) - shift;
      sum += v * v;
    }
    return std::sin(t) * sum * 2.0 * kPi / ring;
  });
  return std::pow(r, 2.0 + a) * integral;
}

double thin_ball_integral(const ExtensionField& w, const Point& center, double r, double shift,
                          ThinIntegrand integrand) {
  require_half_ball_inside(w, center, r);
  const Domain& d = w.domain();
  const bool positive = integrand == ThinIntegrand::PositiveSquare;
  if (d.dim() == 1) {
    const double h = d.spacing(0);
    const double lo = d.shape().lo[0];
    const auto [first, last] = cell_range(d, 0, center[0], r);
    double total = 0.0;
    for (int i = first; i <= last; ++i) {
      const double xl = lo + i * h;
      double p = std::max(xl, center[0] - r);
      double q = std::min(xl + h, center[0] + r);
      if (q <= p) continue;
      const std::size_t g = d.grid_index(i);
      const double f0 = w.at(g, 0) - shift, f1 = w.at(g + 1, 0) - shift;
      auto value = [&](double x) { return f0 + (f1 - f0) * (x - xl) / h; };
      double vp = value(p), vq = value(q);
      if (positive) {
        if (vp <= 0.0 && vq <= 0.0) continue;
        if (vp < 0.0 || vq < 0.0) {
          const double root = p + (q - p) * vp / (vp - vq);
          if (vp < 0.0) {
            p = root;
            vp = 0.0;
          } else {
            q = root;
            vq = 0.0;
          }
        }
      }
      total += (q - p) * (vp * vp + vp * vq + vq * vq) / 3.0;
    }
    return total;
  }
  static const QuadratureRule gl = gauss_unit(4);
  const double h0 = d.spacing(0), h1 = d.spacing(1);
  const auto [i0, i1] = cell_range(d, 0, center[0], r);
  const auto [j0, j1] = cell_range(d, 1, center[1], r);
  double total = 0.0;
  for (int cj = j0; cj <= j1; ++cj) {
    for (int ci = i0; ci <= i1; ++ci) {
      const double xl = d.shape().lo[0] + ci * h0;
      const double yl = d.shape().lo[1] + cj * h1;
      const std::size_t g00 = d.grid_index(ci, cj);
      const std::size_t g01 = d.grid_index(ci, cj + 1);
      const double a00 = w.at(g00, 0) - shift, a10 = w.at(g00 + 1, 0) - shift;
      const double a01 = w.at(g01, 0) - shift, a11 = w.at(g01 + 1, 0) - shift;
      for (std::size_t q1 = 0; q1 < gl.nodes.size(); ++q1) {
        for (std::size_t q0 = 0; q0 < gl.nodes.size(); ++q0) {
          const double xi0 = gl.nodes[q0], xi1 = gl.nodes[q1];
          const double dx = xl + xi0 * h0 - center[0];
          const double dz = yl + xi1 * h1 - center[1];
          if (dx * dx + dz * dz >= r * r) continue;
          double v = (1.0 - xi1) * ((1.0 - xi0) * a00 + xi0 * a10) + xi1 * ((1.0 - xi0) * a01 + xi0 * a11);
          if (positive) v = std::max(v, 0.0);
          total += gl.weights[q0] * gl.weights[q1] * h0 * h1 * v * v;
        }
      }
    }
  }
  return total;
}

}  // namespace fracplasma
