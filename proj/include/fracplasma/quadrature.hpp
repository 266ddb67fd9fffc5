#pragma once

#include <vector>

namespace fracplasma {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Jacobi rule for int_{-1}^{1} (1-x)^alpha (1+x)^beta g(x) dx
/// (Golub-Welsch).
QuadratureRule gauss_jacobi(int order, double alpha, double beta);

QuadratureRule gauss_legendre(int order);

/// Rule on [0, 1] for int_0^1 t^power g(t) dt.
QuadratureRule gauss_power_weight(int order, double power);

/// Rule on [0, 1] for int_0^1 g(t) dt.
QuadratureRule gauss_unit(int order);

/// Moments int_{lo}^{hi} y^a eta^p dy for p = 0, 1, 2, where
/// eta = (y - ref) / width. Requires 0 <= lo <= hi and a > -1.
struct WeightedMoments {
  double m0 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
};
WeightedMoments weighted_moments(double lo, double hi, double ref, double width, double a);

/// int_{lo}^{hi} y^a dy.
double weighted_length(double lo, double hi, double a);

}  // namespace fracplasma
