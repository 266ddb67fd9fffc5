#include "oracles.hpp"

#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <boost/math/special_functions/beta.hpp>

namespace oracle {

double interval_plasma_s1(double x, double lambda, double gamma) {
  const double k = std::sqrt(lambda);
  const double half = M_PI / (2.0 * k);
  const double xb = M_PI / 2.0 - half;
  const double amp = gamma / (xb * k);
  const double dx = std::abs(x - M_PI / 2.0);
  if (dx < half) return gamma + amp * std::cos(k * dx);
  return gamma * std::min(x, M_PI - x) / xb;
}

NewtonResult stencil_plasma_newton_1d(int nodes, double length, double lambda, double gamma,
                                      const Eigen::VectorXd& guess) {
  const int m = nodes - 2;
  const double h = length / (nodes - 1);
  const double ih2 = 1.0 / (h * h);
  NewtonResult out;
  out.u = guess;
  auto residual = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd r(m);
    for (int i = 0; i < m; ++i) {
      const double left = i > 0 ? u[i - 1] : 0.0;
      const double right = i + 1 < m ? u[i + 1] : 0.0;
      r[i] = (2.0 * u[i] - left - right) * ih2 - lambda * std::max(u[i] - gamma, 0.0);
    }
    return r;
  };
  for (int it = 0; it < 100; ++it) {
    const Eigen::VectorXd r = residual(out.u);
    out.residual = r.lpNorm<Eigen::Infinity>();
    out.iterations = it;
    if (out.residual <= 1e-14 * ih2 * std::max(1.0, out.u.lpNorm<Eigen::Infinity>())) {
      out.converged = true;
      return out;
    }
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < m; ++i) {
      t.emplace_back(i, i, 2.0 * ih2 - (out.u[i] > gamma ? lambda : 0.0));
      if (i > 0) t.emplace_back(i, i - 1, -ih2);
      if (i + 1 < m) t.emplace_back(i, i + 1, -ih2);
    }
    Eigen::SparseMatrix<double> J(m, m);
    J.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
    const Eigen::VectorXd step = lu.solve(r);
    out.u -= step;
    if (step.lpNorm<Eigen::Infinity>() < 1e-15 * std::max(1.0, out.u.lpNorm<Eigen::Infinity>())) {
      out.residual = residual(out.u).lpNorm<Eigen::Infinity>();
      out.converged = true;
      out.iterations = it + 1;
      return out;
    }
  }
  return out;
}

std::vector<double> stencil_eigenvalues_1d(int nodes, double length) {
  const double h = length / (nodes - 1);
  std::vector<double> ev;
  for (int k = 1; k <= nodes - 2; ++k) {
    const double sn = std::sin(k * M_PI * h / (2.0 * length));
    ev.push_back(4.0 / (h * h) * sn * sn);
  }
  return ev;
}

double half_circle_moment(double a, int p) {
  // int_0^pi sin^a cos^p = B((a+1)/2, (p+1)/2)
  return boost::math::beta((a + 1.0) / 2.0, (p + 1.0) / 2.0);
}

}  // namespace oracle
