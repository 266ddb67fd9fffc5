#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fracplasma/fractional.hpp"

namespace fracplasma {

/// Quadratic: G(u) = int (u - gamma)_+^2 (default). Linear: G(u) = int (u - gamma)_+.
enum class ConstraintKind { Quadratic, Linear };

enum class SolveStatus { Converged, Trivial, MaxIterations, BracketNotFound, Stagnated };

std::string to_string(SolveStatus status);
std::string to_string(ConstraintKind kind);

struct SolverOptions {
  double damping = 0.5;
  double tolerance = 1e-10;
  int max_iterations = 10000;
  ConstraintKind constraint = ConstraintKind::Quadratic;
  /// Relative tolerance |G - c| <= constraint_tolerance * c.
  double constraint_tolerance = 1e-6;
  /// Multiplier bracket for constrained solves, in units of lambda_1^s.
  double bracket_lo = 1.0;
  double bracket_hi = 50.0;
  /// Initial coefficients for the plain iteration and the minimizer;
  /// defaults to beta phi_1 with max u = 2 gamma.
  std::optional<Eigen::VectorXd> initial;
};

struct PlasmaSolution {
  SpectralField u;
  double lambda = 0.0;
  double gamma = 0.0;
  double s = 0.0;
  double c = 0.0;
  double residual = 0.0;
  SolveStatus status = SolveStatus::MaxIterations;
  int iterations = 0;
  std::vector<double> trace;
  /// (lambda, G) samples visited by the constrained search.
  std::vector<std::pair<double, double>> curve;
  std::string message;

  bool converged() const { return status == SolveStatus::Converged; }
  bool nontrivial() const { return status == SolveStatus::Converged && u.nodal().maxCoeff() > gamma; }
};

/// Nodal (u - gamma)_+ on the interior nodes.
Eigen::VectorXd plasma_rhs(const SpectralField& u, double gamma);

/// G(u); summed in sorted order so it is invariant under any permutation of
/// the nodal values.
double constraint_value(const Domain& domain, const Eigen::VectorXd& nodal, double gamma,
                        ConstraintKind kind);

/// ||(-Delta)^s u - lambda P (u - gamma)_+||, P the projection on the basis.
double plasma_residual(const SpectralField& u, double lambda, double gamma, double s);

/// Nontrivial solution of (-Delta)^s u = lambda (u - gamma)_+ at fixed lambda.
///
/// The shape w = u mu / gamma (max normalized on phi_1) solves
/// w = lambda (-Delta)^-s P (w - mu)_+. The branch is traced from the
/// eigenfunction at mu = 0, lambda = lambda_1^s by Newton-GMRES continuation in
/// mu until lambda is reached. For lambda <= lambda_1^s the damped plain
/// iteration is run instead and collapses to u = 0 (status Trivial).
PlasmaSolution solve_fixed_lambda(double lambda, double gamma, double s,
                                  std::shared_ptr<const EigenBasis> basis, const SolverOptions& opts = {});

/// Finds lambda with G(u_lambda) = c by walking the same branch until G
/// crosses c, then a bracketed root search in the level mu.
PlasmaSolution solve_constrained(double c, double gamma, double s, std::shared_ptr<const EigenBasis> basis,
                                 const SolverOptions& opts = {});

/// Minimizes sum lambda_k^s a_k^2 subject to G(u) = c (quadratic constraint)
/// by an augmented Lagrangian with limited-memory BFGS inner solves. The
/// reported lambda is the converged multiplier.
PlasmaSolution minimize_energy(double c, double gamma, double s, std::shared_ptr<const EigenBasis> basis,
                               const SolverOptions& opts = {});

/// Symmetric decreasing rearrangement of every grid line parallel to `axis`
/// about the mid-hyperplane of the box. Throws if the mask is not symmetric.
Eigen::VectorXd steiner_symmetrize(const Domain& domain, const Eigen::VectorXd& interior_values, int axis);

}  // namespace fracplasma
