#include "fracplasma/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace fracplasma {

QuadratureRule gauss_jacobi(int order, double alpha, double beta) {
  if (order < 1) throw std::invalid_argument("gauss_jacobi: order must be positive");
  if (!(alpha > -1.0 && beta > -1.0)) throw std::invalid_argument("gauss_jacobi: exponents must exceed -1");
  const double ab = alpha + beta;
  Eigen::VectorXd diag(order);
  Eigen::VectorXd sub(std::max(order - 1, 0));
  for (int k = 0; k < order; ++k) {
    const double t = 2.0 * k + ab;
    diag[k] = k == 0 ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / (t * (t + 2.0));
  }
  for (int k = 1; k < order; ++k) {
    const double t = 2.0 * k + ab;
    double b;
    if (k == 1) {
      b = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      b = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (t * t * (t + 1.0) * (t - 1.0));
    }
    sub[k - 1] = std::sqrt(b);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw std::runtime_error("gauss_jacobi: eigensolver failed");
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                              std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  for (int k = 0; k < order; ++k) {
    rule.nodes[static_cast<std::size_t>(k)] = solver.eigenvalues()[k];
    const double v = solver.eigenvectors()(0, k);
    rule.weights[static_cast<std::size_t>(k)] = mu0 * v * v;
  }
  return rule;
}

QuadratureRule gauss_legendre(int order) { return gauss_jacobi(order, 0.0, 0.0); }

QuadratureRule gauss_power_weight(int order, double power) {
  QuadratureRule r = gauss_jacobi(order, 0.0, power);
  const double scale = std::pow(0.5, power + 1.0);
  for (std::size_t q = 0; q < r.nodes.size(); ++q) {
    r.nodes[q] = 0.5 * (r.nodes[q] + 1.0);
    r.weights[q] *= scale;
  }
  return r;
}

QuadratureRule gauss_unit(int order) { return gauss_power_weight(order, 0.0); }

namespace {

// int_lo^hi y^e dy for e > 0 (e = a + q + 1 is the antiderivative power).
double power_integral(double lo, double hi, double e) {
  if (hi <= lo) return 0.0;
  if (lo <= 0.0) return std::pow(hi, e) / e;
  return std::pow(lo, e) * std::expm1(e * std::log1p((hi - lo) / lo)) / e;
}

}  // namespace

double weighted_length(double lo, double hi, double a) { return power_integral(lo, hi, a + 1.0); }

WeightedMoments weighted_moments(double lo, double hi, double ref, double width, double a) {
  WeightedMoments m;
  if (hi <= lo) return m;
  if (lo > 0.0 && hi - lo < 0.5 * lo) {
    static const QuadratureRule rule = gauss_unit(8);
    const double len = hi - lo;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double y = lo + len * rule.nodes[q];
      const double w = rule.weights[q] * len * std::pow(y, a);
      const double eta = (y - ref) / width;
      m.m0 += w;
      m.m1 += w * eta;
      m.m2 += w * eta * eta;
    }
    return m;
  }
  const double p0 = power_integral(lo, hi, a + 1.0);
  const double p1 = power_integral(lo, hi, a + 2.0);
  const double p2 = power_integral(lo, hi, a + 3.0);
  m.m0 = p0;
  m.m1 = (p1 - ref * p0) / width;
  m.m2 = (p2 - 2.0 * ref * p1 + ref * ref * p0) / (width * width);
  return m;
}

}  // namespace fracplasma
