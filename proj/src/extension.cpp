#include "fracplasma/extension.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fracplasma/half_ball.hpp"
#include "fracplasma/quadrature.hpp"

namespace fracplasma {
namespace {

void require_extension_order(double s) {
  if (!(s > 0.0 && s < 1.0)) {
    throw std::invalid_argument("extension: order s must lie in (0, 1), got " + std::to_string(s));
  }
}

}  // namespace

YMesh YMesh::graded(double height, int layers, double grading) {
  if (!(height > 0.0)) throw std::invalid_argument("YMesh: height must be positive");
  if (layers < 2) throw std::invalid_argument("YMesh: need at least 2 layers");
  if (!(grading >= 1.0)) throw std::invalid_argument("YMesh: grading exponent must be >= 1");
  YMesh m;
  m.height = height;
  m.layers = layers;
  m.grading = grading;
  m.nodes.resize(static_cast<std::size_t>(layers) + 1);
  for (int j = 0; j <= layers; ++j) {
    m.nodes[static_cast<std::size_t>(j)] = height * std::pow(static_cast<double>(j) / layers, grading);
  }
  m.nodes.back() = height;
  return m;
}

double YMesh::default_grading(double a) { return std::max(2.0, 2.0 / (1.0 - a)); }

int YMesh::locate(double y) const {
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), y);
  int j = static_cast<int>(it - nodes.begin()) - 1;
  return std::clamp(j, 0, layers - 1);
}

std::string to_string(ExtensionKind kind) {
  switch (kind) {
    case ExtensionKind::SemiAnalytic:
      return "semi-analytic";
    case ExtensionKind::FiniteDifference:
      return "finite-difference";
    case ExtensionKind::Synthetic:
      return "synthetic";
  }
  return "unknown";
}

ExtensionField::ExtensionField(std::shared_ptr<const Domain> domain, YMesh mesh, double s,
                               ExtensionKind kind, Eigen::MatrixXd values)
    : domain_(std::move(domain)), mesh_(std::move(mesh)), s_(s), kind_(kind), values_(std::move(values)) {
  require_extension_order(s_);
  if (!domain_) throw std::invalid_argument("ExtensionField: null domain");
  if (static_cast<std::size_t>(values_.rows()) != domain_->grid_size() ||
      values_.cols() != mesh_.layers + 1) {
    throw std::invalid_argument("ExtensionField: value array does not match grid x mesh");
  }
}

double ExtensionField::interpolate(const Point& x, double y) const {
  const Domain& d = *domain_;
  const int n = d.nodes_per_axis();
  const int j = mesh_.locate(y);
  const double eta = std::clamp((y - mesh_.nodes[static_cast<std::size_t>(j)]) / mesh_.spacing(j), 0.0, 1.0);
  std::array<int, 2> cell{0, 0};
  std::array<double, 2> xi{0.0, 0.0};
  for (int ax = 0; ax < d.dim(); ++ax) {
    const double t = (x[ax] - d.shape().lo[ax]) / d.spacing(ax);
    cell[ax] = std::clamp(static_cast<int>(std::floor(t)), 0, n - 2);
    xi[ax] = std::clamp(t - cell[ax], 0.0, 1.0);
  }
  auto layer_value = [&](int layer) {
    if (d.dim() == 1) {
      const std::size_t g = d.grid_index(cell[0]);
      return (1.0 - xi[0]) * at(g, layer) + xi[0] * at(g + 1, layer);
    }
    const std::size_t g00 = d.grid_index(cell[0], cell[1]);
    const std::size_t g01 = d.grid_index(cell[0], cell[1] + 1);
    return (1.0 - xi[1]) * ((1.0 - xi[0]) * at(g00, layer) + xi[0] * at(g00 + 1, layer)) +
           xi[1] * ((1.0 - xi[0]) * at(g01, layer) + xi[0] * at(g01 + 1, layer));
  };
  return (1.0 - eta) * layer_value(j) + eta * layer_value(j + 1);
}

double mode_profile(double s, double z) {
  if (z <= 0.0) return 1.0;
  if (z > kProfileCutoff) return 0.0;
  if (s == 0.5) return std::exp(-z);
  const double pref = std::exp((1.0 - s) * std::log(2.0) - std::lgamma(s));
  return pref * std::pow(z, s) * std::cyl_bessel_k(s, z);
}

double mode_profile_derivative(double s, double z) {
  if (z > kProfileCutoff) return 0.0;
  if (s == 0.5) return -std::exp(-z);
  if (z <= 0.0) {
    // psi' ~ -c z^(2s-1): finite only for s >= 1/2.
    return s > 0.5 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  const double pref = std::exp((1.0 - s) * std::log(2.0) - std::lgamma(s));
  return -pref * std::pow(z, s) * std::cyl_bessel_k(1.0 - s, z);
}

ExtensionField extend_semianalytic(const SpectralField& u, double s, const YMesh& mesh) {
  require_extension_order(s);
  const EigenBasis& basis = u.basis();
  const Domain& d = basis.domain();
  const Eigen::VectorXd roots = basis.eigenvalues().cwiseSqrt();
  const Eigen::VectorXd& a = u.coefficients();
  Eigen::MatrixXd values(static_cast<Eigen::Index>(d.grid_size()), mesh.layers + 1);
  std::size_t clamped = 0;
  Eigen::VectorXd scaled(a.size());
  for (int j = 0; j <= mesh.layers; ++j) {
    const double y = mesh.nodes[static_cast<std::size_t>(j)];
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      const double z = roots[k] * y;
      if (z > kProfileCutoff && a[k] != 0.0) ++clamped;
      scaled[k] = a[k] * mode_profile(s, z);
    }
    values.col(j) = d.embed(j == 0 ? u.nodal() : basis.synthesize(scaled));
  }
  ExtensionField w(basis.domain_ptr(), mesh, s, ExtensionKind::SemiAnalytic, std::move(values));
  w.set_calibration_eigenvalue(basis.eigenvalue(0));
  w.set_clamped_profiles(clamped);
  return w;
}

SchemeWeights scheme_weights(const YMesh& mesh, double a) {
  SchemeWeights sw;
  const auto M = static_cast<std::size_t>(mesh.layers);
  sw.face.resize(M);
  for (std::size_t j = 0; j < M; ++j) sw.face[j] = weighted_length(mesh.nodes[j], mesh.nodes[j + 1], a);
  sw.lumped.assign(M + 1, 0.0);
  for (std::size_t j = 0; j <= M; ++j) {
    if (j > 0) sw.lumped[j] += 0.5 * sw.face[j - 1];
    if (j < M) sw.lumped[j] += 0.5 * sw.face[j];
  }
  return sw;
}

ExtensionField extend_fd(const Eigen::VectorXd& f, const EigenBasis& basis, double s,
                         const YMesh& mesh) {
  require_extension_order(s);
  if (!basis.complete()) {
    throw std::invalid_argument("extend_fd: the finite-difference solve needs a complete basis");
  }
  const Domain& d = basis.domain();
  const double a = 1.0 - 2.0 * s;
  const SchemeWeights sw = scheme_weights(mesh, a);
  const int M = mesh.layers;
  std::vector<double> kappa(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) {
    const double dy = mesh.spacing(j);
    kappa[static_cast<std::size_t>(j)] = sw.face[static_cast<std::size_t>(j)] / (dy * dy);
  }

  const Eigen::VectorXd data = basis.analyze(f);
  const auto K = data.size();
  Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(K, M + 1);
  coeff.col(0) = data;

  // Thomas algorithm on rows j = 1..M-1 for each mode.
  std::vector<double> cprime(static_cast<std::size_t>(M));
  std::vector<double> dprime(static_cast<std::size_t>(M));
  for (Eigen::Index k = 0; k < K; ++k) {
    const double lam = basis.eigenvalue(static_cast<std::size_t>(k));
    for (int j = 1; j < M; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      const double lower = -kappa[ju - 1];
      const double upper = -kappa[ju];
      const double diag = kappa[ju - 1] + kappa[ju] + sw.lumped[ju] * lam;
      double rhs = j == 1 ? kappa[0] * data[k] : 0.0;
      if (j == 1) {
        cprime[ju] = upper / diag;
        dprime[ju] = rhs / diag;
      } else {
        const double denom = diag - lower * cprime[ju - 1];
        cprime[ju] = upper / denom;
        dprime[ju] = (rhs - lower * dprime[ju - 1]) / denom;
      }
    }
    double next = 0.0;
    for (int j = M - 1; j >= 1; --j) {
      const auto ju = static_cast<std::size_t>(j);
      next = dprime[ju] - cprime[ju] * next;
      coeff(k, j) = next;
    }
  }

  Eigen::MatrixXd values(static_cast<Eigen::Index>(d.grid_size()), M + 1);
  values.col(0) = d.embed(f);
  for (int j = 1; j <= M; ++j) values.col(j) = d.embed(basis.synthesize(coeff.col(j)));
  ExtensionField w(basis.domain_ptr(), mesh, s, ExtensionKind::FiniteDifference, std::move(values));
  w.set_calibration_eigenvalue(basis.eigenvalue(0));
  return w;
}

ExtensionField sample_extension(std::shared_ptr<const Domain> domain, double s, const YMesh& mesh,
                                const std::function<double(const Point&, double)>& fn) {
  if (!domain) throw std::invalid_argument("sample_extension: null domain");
  Eigen::MatrixXd values(static_cast<Eigen::Index>(domain->grid_size()), mesh.layers + 1);
  for (std::size_t g = 0; g < domain->grid_size(); ++g) {
    const Point x = domain->position(g);
    for (int j = 0; j <= mesh.layers; ++j) {
      values(static_cast<Eigen::Index>(g), j) = fn(x, mesh.nodes[static_cast<std::size_t>(j)]);
    }
  }
  return ExtensionField(std::move(domain), mesh, s, ExtensionKind::Synthetic, std::move(values));
}

double weighted_energy(const ExtensionField& w) {
  const Domain& d = w.domain();
  const YMesh& mesh = w.mesh();
  const SchemeWeights sw = scheme_weights(mesh, w.a());
  const int n = d.nodes_per_axis();
  const double vol = d.cell_volume();
  double energy = 0.0;
  for (int j = 0; j <= mesh.layers; ++j) {
    double grad = 0.0;
    for (std::size_t g = 0; g < d.grid_size(); ++g) {
      const auto ij = d.grid_coords(g);
      for (int ax = 0; ax < d.dim(); ++ax) {
        if (ij[ax] + 1 >= n) continue;
        auto nb = ij;
        nb[ax] += 1;
        const double diff = w.at(d.grid_index(nb[0], nb[1]), j) - w.at(g, j);
        grad += diff * diff / (d.spacing(ax) * d.spacing(ax));
      }
    }
    energy += sw.lumped[static_cast<std::size_t>(j)] * vol * grad;
  }
  for (int j = 0; j < mesh.layers; ++j) {
    const double dy = mesh.spacing(j);
    const double kappa = sw.face[static_cast<std::size_t>(j)] / (dy * dy);
    energy += kappa * vol * (w.values().col(j + 1) - w.values().col(j)).squaredNorm();
  }
  return energy;
}

SeriesFit::SeriesFit(const YMesh& mesh, double s) {
  if (mesh.layers < 3) {
    throw std::invalid_argument("series fit: need at least two interior y-layers");
  }
  const int L = std::min(4, mesh.layers - 1);
  const double exps[4] = {2.0 * s, 2.0, 2.0 + 2.0 * s, 4.0};
  const double top = mesh.nodes[static_cast<std::size_t>(L)];
  Eigen::MatrixXd V(L, L);
  for (int j = 1; j <= L; ++j) {
    for (int q = 0; q < L; ++q) V(j - 1, q) = std::pow(mesh.nodes[static_cast<std::size_t>(j)] / top, exps[q]);
  }
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(L);
  e0[0] = 1.0;
  const Eigen::VectorXd row = V.transpose().colPivHouseholderQr().solve(e0);
  row_.assign(row.data(), row.data() + row.size());
  scale_ = 1.0 / std::pow(top, exps[0]);
}

double SeriesFit::leading(const std::vector<double>& values) const {
  double b = 0.0;
  for (std::size_t j = 0; j < row_.size(); ++j) b += row_[j] * (values[j + 1] - values[0]);
  return b * scale_;
}

double dtn_normalization(const ExtensionField& w) {
  const SeriesFit fit(w.mesh(), w.s());
  const double mu = w.calibration_eigenvalue();
  std::vector<double> profile(static_cast<std::size_t>(fit.layers_used()) + 1);
  for (std::size_t j = 0; j < profile.size(); ++j) profile[j] = mode_profile(w.s(), std::sqrt(mu) * w.mesh().nodes[j]);
  return -std::pow(mu, w.s()) / fit.leading(profile);
}

double flux_scale(const ExtensionField& w) { return 2.0 * w.s() / dtn_normalization(w); }

Eigen::VectorXd dtn(const ExtensionField& w) {
  const SeriesFit fit(w.mesh(), w.s());
  const double C = dtn_normalization(w);
  const Domain& d = w.domain();
  Eigen::VectorXd out(static_cast<Eigen::Index>(d.interior_count()));
  std::vector<double> column(static_cast<std::size_t>(fit.layers_used()) + 1);
  for (std::size_t k = 0; k < d.interior_count(); ++k) {
    const std::size_t g = d.interior_nodes()[k];
    for (std::size_t j = 0; j < column.size(); ++j) column[j] = w.at(g, static_cast<int>(j));
    out[static_cast<Eigen::Index>(k)] = -C * fit.leading(column);
  }
  return out;
}

SignReport check_uy_sign(const ExtensionField& w, double tol) {
  SignReport report;
  report.max_derivative = -std::numeric_limits<double>::infinity();
  const YMesh& mesh = w.mesh();
  for (int j = 0; j < mesh.layers; ++j) {
    const double dy = mesh.spacing(j);
    for (std::size_t g = 0; g < w.domain().grid_size(); ++g) {
      const double dw = (w.at(g, j + 1) - w.at(g, j)) / dy;
      report.max_derivative = std::max(report.max_derivative, dw);
      ++report.checked;
      if (dw > tol) report.violators.push_back({g, j, dw});
    }
  }
  return report;
}

TraceReport trace_norms(const ExtensionField& w, const Point& center, double r) {
  require_half_ball_inside(w, center, r);
  TraceReport t;
  t.radius = r;
  t.boundary_norm = half_sphere_norm(w, center, r);
  t.thin_norm = thin_ball_integral(w, center, r, 0.0, ThinIntegrand::Square);
  t.energy = half_ball_energy(w, center, r);
  auto ratio = [](double num, double den) {
    if (den > 0.0) return num / den;
    return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  };
  t.boundary_ratio = ratio(t.boundary_norm, r * t.energy);
  t.thin_ratio = ratio(t.thin_norm, std::pow(r, 1.0 - w.a()) * t.energy);
  return t;
}

double hopf_ratio(const ExtensionField& w, const Point& x0, double radius) {
  const Domain& d = w.domain();
  if (radius <= 0.0) radius = 10.0 * d.max_spacing();
  const YMesh& mesh = w.mesh();
  const double base = w.interpolate(x0, 0.0);

  double scale = std::abs(base);
  double spread = 0.0;
  for (std::size_t g = 0; g < d.grid_size(); ++g) {
    const Point p = d.position(g);
    double r2 = 0.0;
    for (int ax = 0; ax < d.dim(); ++ax) r2 += (p[ax] - x0[ax]) * (p[ax] - x0[ax]);
    for (int j = 0; j <= mesh.layers; ++j) {
      const double y = mesh.nodes[static_cast<std::size_t>(j)];
      if (r2 + y * y > radius * radius) break;
      scale = std::max(scale, std::abs(w.at(g, j)));
      spread = std::max(spread, std::abs(w.at(g, j) - base));
    }
  }
  if (spread <= 1e-13 * std::max(scale, 1.0)) {
    throw std::invalid_argument("hopf_ratio: field is constant on the half ball");
  }
  const double slack = 1e-12 * std::max(scale, 1.0);
  for (std::size_t g = 0; g < d.grid_size(); ++g) {
    const Point p = d.position(g);
    double r2 = 0.0;
    for (int ax = 0; ax < d.dim(); ++ax) r2 += (p[ax] - x0[ax]) * (p[ax] - x0[ax]);
    for (int j = 0; j <= mesh.layers; ++j) {
      const double y = mesh.nodes[static_cast<std::size_t>(j)];
      if (r2 + y * y > radius * radius) break;
      if (w.at(g, j) < base - slack) {
        std::ostringstream msg;
        msg << "hopf_ratio: minimum not attained at x0; node at x = (" << p[0];
        if (d.dim() == 2) msg << ", " << p[1];
        msg << "), y = " << y << " has value " << w.at(g, j) << " < " << base;
        throw std::invalid_argument(msg.str());
      }
    }
  }
  const SeriesFit fit(mesh, w.s());
  std::vector<double> column(static_cast<std::size_t>(fit.layers_used()) + 1);
  for (std::size_t j = 0; j < column.size(); ++j) column[j] = w.interpolate(x0, mesh.nodes[j]);
  return fit.leading(column);
}

}  // namespace fracplasma
