#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracplasma/extension.hpp"
#include "fracplasma/free_boundary.hpp"

namespace fracplasma {

/// Almgren-type frequency of v = w - level around (center, 0):
///   D(r) = int_{B_r^+} y^a |grad v|^2,  H(r) = int_{(dB_r)^+} y^a v^2,
///   N(r) = r D / H,  Ntilde(r) = r (D - k lambda int_{B'_r} v_+^2) / H,
/// where k = flux_scale(w) converts the thin-space multiplier into the
/// weighted flux -lim y^a v_y = k lambda v_+.
struct FrequencyProfile {
  Point center{0.0, 0.0};
  double level = 0.0;
  double lambda = 0.0;
  double flux = 0.0;
  std::vector<double> radii;
  std::vector<double> D;
  std::vector<double> H;
  std::vector<double> N;
  std::vector<double> Ntilde;
  /// Radii dropped because H fell below 1e-14.
  bool truncated = false;
  /// Least-squares fit Ntilde ~ N0 + beta r^(1-a) on the three smallest radii
  /// of at least 10h (the three smallest overall if there are fewer).
  double n0 = std::numeric_limits<double>::quiet_NaN();
  double n0_slope = 0.0;
  /// Count of Ntilde(r_{i+1}) < Ntilde(r_i) - 1e-3 |Ntilde(r_i)|, and the
  /// largest relative drop.
  std::size_t monotonicity_violations = 0;
  double max_relative_drop = 0.0;
  /// Smallest C with Ntilde >= (1 - C k lambda r^(1-a)) N at every radius.
  double sandwich_constant = 0.0;
};

/// Distance from a thin point to the boundary of the domain.
double distance_to_boundary(const Domain& domain, const Point& x);

/// `count` evenly spaced radii on [5h, dist/2], clipped to the extension height.
std::vector<double> default_radii(const ExtensionField& w, const Point& center, int count = 12);

FrequencyProfile frequency_profile(const ExtensionField& w, const Point& center, const std::vector<double>& radii,
                                   double lambda, double level = 0.0);

/// u_r(X, Y) = (w(x0 + r X, r Y) - level) / normalization on the unit half
/// ball, resampled on the reference box [-1, 1]^n x [0, 1] and normalized so
/// that int_{(dB_1)^+} y^a u_r^2 = 1 on the reference grid.
struct BlowupField {
  Point center{0.0, 0.0};
  double radius = 0.0;
  /// (r^-(n+a) int_{(dB_r)^+} y^a v^2)^(1/2) on the source grid.
  double normalization = 0.0;
  std::shared_ptr<const ExtensionField> field;
  /// int_{(dB_1)^+} y^a u_r^2 on the reference grid (1 up to roundoff).
  double unit_sphere_norm = 0.0;
  /// N(1, u_r).
  double unit_frequency = 0.0;
};

struct BlowupOptions {
  int nodes_per_axis = 0;  // 0: 129 in 1D, 65 in 2D
  int layers = 96;
};

BlowupField blowup(const ExtensionField& w, const Point& center, double r, double level = 0.0,
                   const BlowupOptions& opts = {});

struct ClassifyOptions {
  double delta = 0.15;
  double fit_tolerance = 0.05;
  int radii = 12;
  /// Optional explicit radii; empty selects default_radii.
  std::vector<double> radius_list;
  double level = 0.0;
};

struct Classification {
  PointTag tag = PointTag::Unresolved;
  std::string reason;
  double gradient_norm = 0.0;
  double threshold = 0.0;
  double n0 = std::numeric_limits<double>::quiet_NaN();
  /// Blow-up fit p(x) - c y^2 (only for frequency near 2).
  bool fitted = false;
  std::vector<double> quadratic;  // 1D: {A}; 2D: {A11, A12, A22} with p = A11 x1^2 + 2 A12 x1 x2 + A22 x2^2
  double c = 0.0;
  double c_relative = 0.0;  // c / trace(A)
  double fit_residual = 0.0;
};

Classification classify_point(const ExtensionField& w, const Point& center, double lambda,
                              const ClassifyOptions& opts = {});

struct CensusEntry {
  Point x{0.0, 0.0};
  PointTag tag = PointTag::Unresolved;
  double n0 = std::numeric_limits<double>::quiet_NaN();
};

struct Census {
  std::size_t points = 0;
  std::size_t cells = 0;
  std::size_t regular = 0;
  std::size_t singular = 0;
  std::size_t unresolved = 0;
  /// Singular candidates grouped into sites: points within 2h of each other
  /// (transitively) form one site.
  std::size_t singular_sites = 0;
  std::vector<CensusEntry> singular_points;
  std::vector<CensusEntry> unresolved_points;
};

/// Classifies every free-boundary point: the gradient test first, the
/// frequency analysis for points that fail it.
Census singular_census(const ExtensionField& w, const FreeBoundary& fb, double lambda,
                       const ClassifyOptions& opts = {});

}  // namespace fracplasma
