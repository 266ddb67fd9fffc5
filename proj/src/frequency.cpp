#include "fracplasma/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "fracplasma/half_ball.hpp"

namespace fracplasma {

double distance_to_boundary(const Domain& d, const Point& x) {
  const ShapeSpec& shape = d.shape();
  double dist = std::numeric_limits<double>::infinity();
  for (int ax = 0; ax < d.dim(); ++ax) dist = std::min({dist, x[ax] - shape.lo[ax], shape.hi[ax] - x[ax]});
  if (shape.kind == ShapeKind::Disk) {
    dist = std::min(dist, shape.radius - std::hypot(x[0] - shape.center[0], x[1] - shape.center[1]));
  }
  return std::max(dist, 0.0);
}

std::vector<double> default_radii(const ExtensionField& w, const Point& center, int count) {
  if (count < 1) throw std::invalid_argument("default_radii: count must be positive");
  const double h = w.domain().max_spacing();
  const double lo = 5.0 * h;
  const double hi = std::min(0.5 * distance_to_boundary(w.domain(), center), 0.95 * w.mesh().height);
  std::vector<double> radii;
  if (hi < lo) return radii;
  if (count == 1) return {lo};
  for (int i = 0; i < count; ++i) radii.push_back(lo + (hi - lo) * i / (count - 1));
  return radii;
}

namespace {

// Least-squares line through (x_i, y_i).
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (std::abs(det) <= 1e-300) return {sy / n, 0.0};
  const double slope = (n * sxy - sx * sy) / det;
  return {(sy - slope * sx) / n, slope};
}

// Reliable radii span at least 10 cells; fall back to the smallest three.
std::size_t first_reliable(const std::vector<double>& radii, double h) {
  const double reliable = 10.0 * h * (1.0 - 1e-12);
  std::size_t first = 0;
  while (first < radii.size() && radii[first] < reliable) ++first;
  return radii.size() - first < 3 ? 0 : first;
}

}  // namespace

FrequencyProfile frequency_profile(const ExtensionField& w, const Point& center, const std::vector<double>& radii,
                                   double lambda, double level) {
  if (lambda < 0.0) throw std::invalid_argument("frequency_profile: lambda must be nonnegative");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw std::invalid_argument("frequency_profile: radii must be positive");
    if (i > 0 && radii[i] <= radii[i - 1]) throw std::invalid_argument("frequency_profile: radii must increase");
  }
  FrequencyProfile p;
  p.center = center;
  p.level = level;
  p.lambda = lambda;
  p.flux = lambda > 0.0 ? flux_scale(w) : 0.0;
  const double a = w.a();
  for (double r : radii) {
    require_half_ball_inside(w, center, r);
    const double H = half_sphere_norm(w, center, r, level);
    if (H < 1e-14) {
      p.truncated = true;
      break;
    }
    const double D = half_ball_energy(w, center, r);
    const double thin = lambda > 0.0 ? thin_ball_integral(w, center, r, level, ThinIntegrand::PositiveSquare) : 0.0;
    p.radii.push_back(r);
    p.D.push_back(D);
    p.H.push_back(H);
    p.N.push_back(r * D / H);
    p.Ntilde.push_back(r * (D - p.flux * lambda * thin) / H);
  }
  const std::size_t m = p.radii.size();
  if (m >= 3) {
    const std::size_t first = first_reliable(p.radii, w.domain().max_spacing());
    std::vector<double> x, y;
    for (std::size_t i = first; i < first + 3; ++i) {
      x.push_back(std::pow(p.radii[i], 1.0 - a));
      y.push_back(p.Ntilde[i]);
    }
    std::tie(p.n0, p.n0_slope) = fit_line(x, y);
  } else if (m > 0) {
    p.n0 = p.Ntilde.front();
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double drop = p.Ntilde[i] - p.Ntilde[i + 1];
    const double scale = std::max(std::abs(p.Ntilde[i]), 1e-300);
    if (drop > 1e-3 * scale) ++p.monotonicity_violations;
    p.max_relative_drop = std::max(p.max_relative_drop, drop / scale);
  }
  if (p.flux * lambda > 0.0) {
    for (std::size_t i = 0; i < m; ++i) {
      if (p.N[i] <= 0.0) continue;
      const double c = (1.0 - p.Ntilde[i] / p.N[i]) / (p.flux * lambda * std::pow(p.radii[i], 1.0 - a));
      p.sandwich_constant = std::max(p.sandwich_constant, c);
    }
  }
  return p;
}

BlowupField blowup(const ExtensionField& w, const Point& center, double r, double level, const BlowupOptions& opts) {
  if (!(r > 0.0)) throw std::invalid_argument("blowup: radius must be positive");
  if (opts.layers < 4) throw std::invalid_argument("blowup: layers must be at least 4");
  require_half_ball_inside(w, center, r);
  const int dim = w.domain().dim();
  const double a = w.a();

  BlowupField out;
  out.center = center;
  out.radius = r;
  const double H = half_sphere_norm(w, center, r, level);
  if (!(H > 1e-300)) throw std::invalid_argument("blowup: w - level vanishes on the half sphere");
  out.normalization = std::sqrt(std::pow(r, -(dim + a)) * H);

  const int n = opts.nodes_per_axis > 0 ? opts.nodes_per_axis : (dim == 1 ? 129 : 65);
  const ShapeSpec shape =
      dim == 1 ? ShapeSpec::interval(-1.0, 1.0) : ShapeSpec::rectangle(Point{-1.0, -1.0}, Point{1.0, 1.0});
  auto ref = std::make_shared<const Domain>(Domain::build(shape, n));
  const YMesh mesh = YMesh::graded(1.0, opts.layers, YMesh::default_grading(a));
  const ExtensionField raw = sample_extension(ref, w.s(), mesh, [&](const Point& X, double Y) {
    Point x = center;
    for (int ax = 0; ax < dim; ++ax) x[ax] += r * X[ax];
    return w.interpolate(x, r * Y) - level;
  });
  const double h_ref = half_sphere_norm(raw, Point{0.0, 0.0}, 1.0);
  if (!(h_ref > 1e-300)) throw std::invalid_argument("blowup: rescaled field vanishes on the unit half sphere");
  auto field = std::make_shared<ExtensionField>(ref, mesh, w.s(), ExtensionKind::Synthetic,
                                                raw.values() / std::sqrt(h_ref));
  out.unit_sphere_norm = half_sphere_norm(*field, Point{0.0, 0.0}, 1.0);
  out.unit_frequency = half_ball_energy(*field, Point{0.0, 0.0}, 1.0) / out.unit_sphere_norm;
  out.field = field;
  return out;
}

namespace {

// Least-squares fit of v((x - x0) / r, y / r) ~ p(X) - c Y^2 on the source
// nodes in the closed half ball B_r^+; the rescaled blow-up has the same
// shape, and the raw nodes avoid a second interpolation.
void fit_quadratic(const ExtensionField& u, const Point& center, double r, double level, Classification& cls) {
  const Domain& d = u.domain();
  const int dim = d.dim();
  const int cols = dim == 1 ? 2 : 4;
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (std::size_t g = 0; g < d.grid_size(); ++g) {
    Point X = d.position(g);
    for (int ax = 0; ax < dim; ++ax) X[ax] = (X[ax] - center[ax]) / r;
    const double x2 = X[0] * X[0] + (dim == 2 ? X[1] * X[1] : 0.0);
    for (int j = 0; j <= u.mesh().layers; ++j) {
      const double Y = u.mesh().nodes[static_cast<std::size_t>(j)] / r;
      if (x2 + Y * Y > 1.0 + 1e-12) break;
      Eigen::VectorXd row(cols);
      if (dim == 1) {
        row << X[0] * X[0], Y * Y;
      } else {
        row << X[0] * X[0], X[0] * X[1], X[1] * X[1], Y * Y;
      }
      rows.push_back(row);
      rhs.push_back(u.at(g, j) - level);
    }
  }
  if (rows.size() < static_cast<std::size_t>(2 * cols)) return;
  Eigen::MatrixXd B(static_cast<Eigen::Index>(rows.size()), cols);
  Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    B.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    v[static_cast<Eigen::Index>(i)] = rhs[i];
  }
  const Eigen::VectorXd beta = B.colPivHouseholderQr().solve(v);
  cls.fitted = true;
  cls.fit_residual = (B * beta - v).norm() / std::max(v.norm(), 1e-300);
  cls.c = -beta[cols - 1];
  double trace = 0.0;
  if (dim == 1) {
    cls.quadratic = {beta[0]};
    trace = beta[0];
  } else {
    cls.quadratic = {beta[0], 0.5 * beta[1], beta[2]};
    trace = beta[0] + beta[2];
  }
  cls.c_relative = std::abs(trace) > 1e-300 ? cls.c / trace : 0.0;
}

}  // namespace

Classification classify_point(const ExtensionField& w, const Point& center, double lambda,
                              const ClassifyOptions& opts) {
  Classification cls;
  const GradientEstimate grad = gradient_estimate(w.domain(), w.thin_trace(), center);
  cls.gradient_norm = grad.norm;
  cls.threshold = grad.threshold;
  if (grad.norm > grad.threshold) {
    cls.tag = PointTag::Regular;
    cls.reason = "gradient";
    return cls;
  }
  const std::vector<double> radii = opts.radius_list.empty() ? default_radii(w, center, opts.radii) : opts.radius_list;
  if (radii.size() < 3) {
    cls.reason = "too close to the boundary for a frequency profile";
    return cls;
  }
  // Only the radii entering the extrapolation are needed.
  std::vector<double> used = radii;
  used.resize(std::min(radii.size(), first_reliable(radii, w.domain().max_spacing()) + 3));
  const FrequencyProfile prof = frequency_profile(w, center, used, lambda, opts.level);
  if (prof.radii.size() < 3) {
    cls.reason = "frequency profile truncated";
    return cls;
  }
  cls.n0 = prof.n0;
  if (std::abs(prof.n0 - 1.0) < opts.delta) {
    cls.tag = PointTag::Regular;
    cls.reason = "frequency near 1";
    return cls;
  }
  if (std::abs(prof.n0 - 2.0) >= opts.delta) {
    cls.reason = "frequency away from 1 and 2";
    return cls;
  }
  fit_quadratic(w, center, prof.radii.front(), opts.level, cls);
  if (cls.fitted && cls.fit_residual < opts.fit_tolerance && cls.c >= 0.0) {
    cls.tag = PointTag::SingularCandidate;
    cls.reason = "frequency near 2, quadratic blow-up";
  } else {
    cls.reason = "frequency near 2, blow-up not quadratic";
  }
  return cls;
}

Census singular_census(const ExtensionField& w, const FreeBoundary& fb, double lambda, const ClassifyOptions& opts) {
  Census census;
  census.points = fb.points.size();
  census.cells = fb.cells.size();
  ClassifyOptions o = opts;
  o.level = fb.level;
  for (const BoundaryPoint& p : fb.points) {
    if (p.tag == PointTag::Regular) {
      ++census.regular;
      continue;
    }
    const Classification cls = classify_point(w, p.x, lambda, o);
    const CensusEntry entry{p.x, cls.tag, cls.n0};
    switch (cls.tag) {
      case PointTag::Regular:
        ++census.regular;
        break;
      case PointTag::SingularCandidate:
        ++census.singular;
        census.singular_points.push_back(entry);
        break;
      case PointTag::Unresolved:
        ++census.unresolved;
        census.unresolved_points.push_back(entry);
        break;
    }
  }
  const std::vector<CensusEntry>& sing = census.singular_points;
  const double link = 2.0 * w.domain().max_spacing() * (1.0 + 1e-9);
  std::vector<std::size_t> site(sing.size(), sing.size());
  for (std::size_t i = 0; i < sing.size(); ++i) {
    if (site[i] != sing.size()) continue;
    site[i] = census.singular_sites++;
    std::vector<std::size_t> stack{i};
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < sing.size(); ++j) {
        if (site[j] != sing.size()) continue;
        if (std::hypot(sing[j].x[0] - sing[k].x[0], sing[j].x[1] - sing[k].x[1]) <= link) {
          site[j] = site[i];
          stack.push_back(j);
        }
      }
    }
  }
  return census;
}

}  // namespace fracplasma
