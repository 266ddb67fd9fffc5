#include "fracplasma/plasma.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <optional>

#include <Eigen/Sparse>
#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/IterativeSolvers>

namespace fracplasma {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged:
      return "converged";
    case SolveStatus::Trivial:
      return "trivial";
    case SolveStatus::MaxIterations:
      return "max_iterations";
    case SolveStatus::BracketNotFound:
      return "bracket_not_found";
    case SolveStatus::Stagnated:
      return "stagnated";
  }
  return "unknown";
}

std::string to_string(ConstraintKind kind) {
  return kind == ConstraintKind::Quadratic ? "quadratic" : "linear";
}

Eigen::VectorXd plasma_rhs(const SpectralField& u, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("plasma_rhs: gamma must be positive");
  return (u.nodal().array() - gamma).max(0.0).matrix();
}

double constraint_value(const Domain& domain, const Eigen::VectorXd& nodal, double gamma,
                        ConstraintKind kind) {
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(nodal.size()));
  for (Eigen::Index i = 0; i < nodal.size(); ++i) {
    const double p = nodal[i] - gamma;
    if (p > 0.0) terms.push_back(kind == ConstraintKind::Quadratic ? p * p : p);
  }
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return domain.cell_volume() * sum;
}

double plasma_residual(const SpectralField& u, double lambda, double gamma, double s) {
  const Eigen::VectorXd lhs = fractional_multipliers(u.basis(), s).cwiseProduct(u.coefficients());
  const Eigen::VectorXd rhs = lambda * u.basis().analyze(plasma_rhs(u, gamma));
  return (lhs - rhs).norm();
}

namespace detail {

// Matrix-free square operator usable with Eigen's iterative solvers.
class LinearMap;

}  // namespace detail
}  // namespace fracplasma

namespace Eigen::internal {
template <>
struct traits<fracplasma::detail::LinearMap> : public traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace fracplasma::detail {

class LinearMap : public Eigen::EigenBase<LinearMap> {
 public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  LinearMap(std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f, Eigen::Index n) : apply(std::move(f)), n_(n) {}
  Eigen::Index rows() const { return n_; }
  Eigen::Index cols() const { return n_; }

  template <typename Rhs>
  Eigen::Product<LinearMap, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<LinearMap, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;

 private:
  Eigen::Index n_;
};

}  // namespace fracplasma::detail

namespace Eigen::internal {
template <typename Rhs>
struct generic_product_impl<fracplasma::detail::LinearMap, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<fracplasma::detail::LinearMap, Rhs,
                                generic_product_impl<fracplasma::detail::LinearMap, Rhs>> {
  using Scalar = typename Product<fracplasma::detail::LinearMap, Rhs>::Scalar;
  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const fracplasma::detail::LinearMap& lhs, const Rhs& rhs, const Scalar& alpha) {
    dst.noalias() += alpha * lhs.apply(rhs);
  }
};
}  // namespace Eigen::internal

namespace fracplasma {
namespace {

PlasmaSolution blank_solution(const std::shared_ptr<const EigenBasis>& basis, Eigen::VectorXd a) {
  PlasmaSolution sol{SpectralField(basis, std::move(a)), 0.0, 0.0, 0.0, 0.0, 0.0, SolveStatus::MaxIterations, 0, {}, {}, {}};
  return sol;
}

Eigen::VectorXd zeros(const EigenBasis& basis) { return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size())); }

void validate(double gamma, double s, const std::shared_ptr<const EigenBasis>& basis, const SolverOptions& opts) {
  if (!basis) throw std::invalid_argument("solver: null basis");
  require_order(s);
  if (!(gamma > 0.0)) throw std::invalid_argument("solver: gamma must be positive");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) throw std::invalid_argument("solver: damping must lie in (0, 1]");
  if (!(opts.tolerance > 0.0)) throw std::invalid_argument("solver: tolerance must be positive");
  if (opts.max_iterations < 1) throw std::invalid_argument("solver: max_iterations must be positive");
  if (!(opts.constraint_tolerance > 0.0)) throw std::invalid_argument("solver: constraint tolerance must be positive");
  if (opts.initial && static_cast<std::size_t>(opts.initial->size()) != basis->size()) {
    throw std::invalid_argument("solver: initial coefficient vector has the wrong length");
  }
}

Eigen::VectorXd default_guess(const EigenBasis& basis, double gamma) {
  Eigen::VectorXd a = zeros(basis);
  a[0] = 2.0 * gamma / basis.mode(0).maxCoeff();
  return a;
}

// Damped plain iteration u <- (1 - omega) u + omega lambda (-Delta)^-s P (u - gamma)_+.
// Below the first eigenvalue it collapses onto u = 0.
PlasmaSolution plain_iteration(double lambda, double gamma, double s, const std::shared_ptr<const EigenBasis>& basis,
                               const SolverOptions& opts, Eigen::VectorXd a) {
  const Eigen::VectorXd inv_mult = lambda * fractional_multipliers(*basis, s).cwiseInverse();
  PlasmaSolution sol = blank_solution(basis, a);
  sol.lambda = lambda;
  sol.gamma = gamma;
  sol.s = s;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const SpectralField u(basis, a);
    const Eigen::VectorXd active = plasma_rhs(u, gamma);
    sol.trace.push_back(plasma_residual(u, lambda, gamma, s));
    sol.iterations = it + 1;
    if (active.maxCoeff() <= 0.0) {
      // (u - gamma)_+ = 0 from here on, so the iterates decay to u = 0.
      sol.u = SpectralField(basis, zeros(*basis));
      sol.residual = 0.0;
      sol.status = SolveStatus::Trivial;
      sol.message = "iteration collapsed to the trivial solution";
      return sol;
    }
    a = (1.0 - opts.damping) * a + opts.damping * inv_mult.cwiseProduct(basis->analyze(active));
  }
  sol.u = SpectralField(basis, a);
  sol.residual = plasma_residual(sol.u, lambda, gamma, s);
  sol.status = sol.residual <= opts.tolerance ? SolveStatus::Converged : SolveStatus::MaxIterations;
  if (sol.status != SolveStatus::Converged) sol.message = "plain iteration did not settle within the iteration limit";
  return sol;
}

// A point (w, mu, lambda) of the nontrivial branch of
//   w = lambda (-Delta)^-s P (w - mu)_+,
// normalized by the first coefficient of w. u = (gamma / mu) w then solves
// the problem with shift gamma.
struct BranchPoint {
  double mu = 0.0;
  double lambda = 0.0;
  Eigen::VectorXd a;
};

enum class Free { Multiplier, Level };

class BranchTracer {
 public:
  BranchTracer(const EigenBasis& basis, double s, int budget)
      : basis_(basis), inv_mult_(fractional_multipliers(basis, s).cwiseInverse()), budget_(budget) {
    lam1s_ = std::pow(basis.eigenvalue(0), s);
  }

  BranchPoint start() const {
    BranchPoint p;
    p.lambda = lam1s_;
    p.a = zeros(basis_);
    p.a[0] = 1.0 / basis_.mode(0).maxCoeff();
    return p;
  }

  double first_multiplier() const { return lam1s_; }
  int iterations() const { return iterations_; }
  bool exhausted() const { return iterations_ >= budget_; }
  std::vector<double>& trace() { return trace_; }

  Eigen::VectorXd active(const BranchPoint& p) const {
    return (basis_.synthesize(p.a).array() - p.mu).max(0.0).matrix();
  }

  Eigen::VectorXd residual(const BranchPoint& p) const {
    return p.a - p.lambda * inv_mult_.cwiseProduct(basis_.analyze(active(p)));
  }

  // Newton correction with the first coefficient held fixed and one of
  // (lambda, mu) free; linear systems by restarted GMRES.
  bool correct(BranchPoint& p, Free free) {
    Eigen::VectorXd F = residual(p);
    double norm = F.norm();
    const double floor = 1e-14 * std::max(1.0, p.a.norm());
    for (int it = 0; it < 40; ++it) {
      trace_.push_back(norm);
      if (norm <= floor) return true;
      if (exhausted()) return false;
      ++iterations_;
      const Eigen::VectorXd w = basis_.synthesize(p.a);
      const Eigen::VectorXd chi = ((w.array() - p.mu) > 0.0).cast<double>().matrix();
      const Eigen::VectorXd column =
          free == Free::Multiplier
              ? Eigen::VectorXd(-inv_mult_.cwiseProduct(basis_.analyze((w.array() - p.mu).max(0.0).matrix())))
              : Eigen::VectorXd(p.lambda * inv_mult_.cwiseProduct(basis_.analyze(chi)));
      const double lam = p.lambda;
      detail::LinearMap J(
          [&](const Eigen::VectorXd& z) {
            Eigen::VectorXd da = z;
            da[0] = 0.0;
            Eigen::VectorXd out = da - lam * inv_mult_.cwiseProduct(basis_.analyze(chi.cwiseProduct(basis_.synthesize(da))));
            out += z[0] * column;
            return out;
          },
          F.size());
      Eigen::GMRES<detail::LinearMap, Eigen::IdentityPreconditioner> gmres;
      gmres.set_restart(80);
      gmres.setMaxIterations(800);
      gmres.setTolerance(1e-13);
      gmres.compute(J);
      const Eigen::VectorXd z = gmres.solve(-F);

      bool accepted = false;
      double t = 1.0;
      for (int k = 0; k < 10 && !accepted; ++k, t *= 0.5) {
        BranchPoint trial = p;
        Eigen::VectorXd da = t * z;
        const double dfree = da[0];
        da[0] = 0.0;
        trial.a += da;
        (free == Free::Multiplier ? trial.lambda : trial.mu) += dfree;
        if (free == Free::Level && !(trial.mu >= 0.0)) continue;
        Eigen::VectorXd Ft = residual(trial);
        const double nt = Ft.norm();
        if (nt < (1.0 - 1e-4 * t) * norm) {
          const bool stalled = nt > 0.5 * norm && nt <= 1e3 * floor;
          p = std::move(trial);
          F = std::move(Ft);
          norm = nt;
          accepted = true;
          if (stalled) {
            trace_.push_back(norm);
            return true;
          }
        }
      }
      if (!accepted) return norm <= 1e3 * floor;
    }
    return norm <= 1e3 * floor;
  }

  // Walks the branch upward in mu from the ground state until `monitor`
  // becomes nonnegative. Returns the bracketing pair, or nullopt if the walk
  // stalls or `give_up` fires first.
  std::optional<std::pair<BranchPoint, BranchPoint>> walk(const std::function<double(const BranchPoint&)>& monitor,
                                                          const std::function<bool(const BranchPoint&)>& give_up,
                                                          std::vector<std::pair<double, double>>* samples,
                                                          const std::function<double(const BranchPoint&)>& sample_value) {
    BranchPoint prev = start();
    BranchPoint cur = prev;
    bool have_prev = false;
    double step = 0.02;
    while (true) {
      BranchPoint next = cur;
      next.mu = cur.mu + step;
      if (have_prev) {
        const double r = step / (cur.mu - prev.mu);
        next.a = cur.a + r * (cur.a - prev.a);
        next.lambda = cur.lambda + r * (cur.lambda - prev.lambda);
      }
      const int before = iterations_;
      if (!correct(next, Free::Multiplier) || !(next.lambda > 0.0)) {
        if (exhausted()) return std::nullopt;
        step *= 0.25;
        if (step < 1e-12) return std::nullopt;
        continue;
      }
      if (samples) samples->emplace_back(next.lambda, sample_value(next));
      if (monitor(next) >= 0.0) return std::make_pair(cur, next);
      if (give_up(next)) return std::nullopt;
      prev = std::move(cur);
      cur = std::move(next);
      have_prev = true;
      if (iterations_ - before <= 4) step = std::min(step * 1.5, 0.1);
    }
  }

  // Point at level mu in [lo.mu, hi.mu], predicted linearly from the ends.
  std::optional<BranchPoint> at_level(const BranchPoint& lo, const BranchPoint& hi, double mu) {
    const double t = (mu - lo.mu) / (hi.mu - lo.mu);
    BranchPoint p;
    p.mu = mu;
    p.a = (1.0 - t) * lo.a + t * hi.a;
    p.lambda = (1.0 - t) * lo.lambda + t * hi.lambda;
    if (!correct(p, Free::Multiplier)) return std::nullopt;
    return p;
  }

  // One plain step w <- lambda (-Delta)^-s P (w - mu)_+ after Newton: damps
  // the roundoff left in high modes before the residual is amplified by
  // lambda_k^s.
  Eigen::VectorXd polished(const BranchPoint& p) const {
    return p.lambda * inv_mult_.cwiseProduct(basis_.analyze(active(p)));
  }

 private:
  const EigenBasis& basis_;
  Eigen::VectorXd inv_mult_;
  double lam1s_ = 0.0;
  int budget_;
  int iterations_ = 0;
  std::vector<double> trace_;
};

PlasmaSolution finish(const std::shared_ptr<const EigenBasis>& basis, BranchTracer& tracer, const BranchPoint& p,
                      double gamma, double s, const SolverOptions& opts) {
  PlasmaSolution sol = blank_solution(basis, (gamma / p.mu) * tracer.polished(p));
  sol.lambda = p.lambda;
  sol.gamma = gamma;
  sol.s = s;
  sol.residual = plasma_residual(sol.u, p.lambda, gamma, s);
  sol.iterations = tracer.iterations();
  sol.trace = tracer.trace();
  sol.trace.push_back(sol.residual);
  sol.c = constraint_value(basis->domain(), sol.u.nodal(), gamma, opts.constraint);
  if (sol.residual <= opts.tolerance) {
    sol.status = SolveStatus::Converged;
  } else {
    sol.status = SolveStatus::Stagnated;
    sol.message = "residual floor above tolerance";
  }
  return sol;
}

double level_constraint(const Domain& dom, const EigenBasis& basis, const BranchPoint& p, double gamma,
                        ConstraintKind kind) {
  return constraint_value(dom, (gamma / p.mu) * basis.synthesize(p.a), gamma, kind);
}

}  // namespace

PlasmaSolution solve_fixed_lambda(double lambda, double gamma, double s, std::shared_ptr<const EigenBasis> basis,
                                  const SolverOptions& opts) {
  validate(gamma, s, basis, opts);
  if (!(lambda > 0.0)) throw std::invalid_argument("solve_fixed_lambda: lambda must be positive");
  const Eigen::VectorXd guess = opts.initial ? *opts.initial : default_guess(*basis, gamma);
  BranchTracer tracer(*basis, s, opts.max_iterations);
  if (lambda <= tracer.first_multiplier() || basis->synthesize(guess).maxCoeff() <= gamma) {
    return plain_iteration(lambda, gamma, s, basis, opts, guess);
  }

  auto fail = [&](SolveStatus status, const std::string& why) {
    PlasmaSolution sol = blank_solution(basis, zeros(*basis));
    sol.lambda = lambda;
    sol.gamma = gamma;
    sol.s = s;
    sol.status = status;
    sol.iterations = tracer.iterations();
    sol.trace = tracer.trace();
    sol.message = why;
    return sol;
  };

  const auto bracket = tracer.walk([&](const BranchPoint& p) { return p.lambda - lambda; },
                                   [](const BranchPoint&) { return false; }, nullptr,
                                   [](const BranchPoint&) { return 0.0; });
  if (!bracket) return fail(SolveStatus::MaxIterations, "branch continuation stalled before reaching lambda");
  const auto& [lo, hi] = *bracket;
  const double t = (lambda - lo.lambda) / (hi.lambda - lo.lambda);
  BranchPoint p;
  p.lambda = lambda;
  p.mu = (1.0 - t) * lo.mu + t * hi.mu;
  p.a = (1.0 - t) * lo.a + t * hi.a;
  if (!tracer.correct(p, Free::Level)) {
    return fail(SolveStatus::Stagnated, "Newton correction at fixed lambda did not converge");
  }
  return finish(basis, tracer, p, gamma, s, opts);
}

PlasmaSolution solve_constrained(double c, double gamma, double s, std::shared_ptr<const EigenBasis> basis,
                                 const SolverOptions& opts) {
  validate(gamma, s, basis, opts);
  if (!(c > 0.0)) throw std::invalid_argument("solve_constrained: c must be positive");
  if (!(opts.bracket_hi > opts.bracket_lo && opts.bracket_lo > 0.0)) {
    throw std::invalid_argument("solve_constrained: invalid multiplier bracket");
  }
  const Domain& dom = basis->domain();
  BranchTracer tracer(*basis, s, opts.max_iterations);
  const double lam_lo = tracer.first_multiplier() * opts.bracket_lo;
  const double lam_hi = tracer.first_multiplier() * opts.bracket_hi;
  std::vector<std::pair<double, double>> curve;
  auto G = [&](const BranchPoint& p) { return level_constraint(dom, *basis, p, gamma, opts.constraint); };

  auto fail = [&](SolveStatus status, const std::string& why) {
    PlasmaSolution sol = blank_solution(basis, zeros(*basis));
    sol.gamma = gamma;
    sol.s = s;
    sol.c = c;
    sol.status = status;
    sol.iterations = tracer.iterations();
    sol.trace = tracer.trace();
    sol.curve = curve;
    sol.message = why;
    return sol;
  };

  // Along the branch G falls from +inf (mu -> 0) towards 0 while lambda grows.
  const auto bracket = tracer.walk([&](const BranchPoint& p) { return c - G(p); },
                                   [&](const BranchPoint& p) { return p.lambda > lam_hi; }, &curve, G);
  if (!bracket) {
    return fail(tracer.exhausted() ? SolveStatus::MaxIterations : SolveStatus::BracketNotFound,
                "constraint value not reached for multipliers up to the bracket end");
  }
  BranchPoint lo = bracket->first;
  const BranchPoint hi = bracket->second;
  if (hi.lambda < lam_lo) {
    return fail(SolveStatus::BracketNotFound, "constraint value reached below the multiplier bracket");
  }
  // G is infinite at mu = 0; move the lower end up to a finite value above c.
  if (!(lo.mu > 0.0)) {
    const BranchPoint base = lo;
    double mu = hi.mu;
    for (;;) {
      mu *= 0.25;
      if (mu < 1e-12) return fail(SolveStatus::Stagnated, "constraint value too large for the level search");
      auto p = tracer.at_level(base, hi, mu);
      if (!p) return fail(SolveStatus::Stagnated, "Newton correction failed near the eigenfunction");
      const double g = G(*p);
      curve.emplace_back(p->lambda, g);
      if (g >= c) {
        lo = std::move(*p);
        break;
      }
    }
  }

  std::optional<BranchPoint> best;
  double best_gap = std::numeric_limits<double>::infinity();
  const double ctol = opts.constraint_tolerance * c;
  auto f = [&](double mu) {
    auto p = tracer.at_level(lo, hi, mu);
    if (!p) throw std::runtime_error("Newton correction failed inside the constraint bracket");
    const double g = G(*p);
    curve.emplace_back(p->lambda, g);
    if (std::abs(g - c) < best_gap) {
      best_gap = std::abs(g - c);
      best = std::move(*p);
    }
    return c - g;
  };
  std::uintmax_t max_iter = 100;
  try {
    boost::math::tools::toms748_solve(
        f, lo.mu, hi.mu, c - G(lo), c - G(hi),
        [&](double a, double b) { return best_gap <= 0.25 * ctol || std::abs(b - a) <= 1e-15 * b; }, max_iter);
  } catch (const std::runtime_error& e) {
    return fail(SolveStatus::Stagnated, e.what());
  }
  if (!best) return fail(SolveStatus::Stagnated, "no corrected point inside the constraint bracket");
  PlasmaSolution sol = finish(basis, tracer, *best, gamma, s, opts);
  sol.c = c;
  sol.curve = curve;
  const double g = constraint_value(dom, sol.u.nodal(), gamma, opts.constraint);
  if (sol.status == SolveStatus::Converged && std::abs(g - c) > ctol) {
    sol.status = SolveStatus::Stagnated;
    sol.message = "constraint tolerance not met";
  }
  return sol;
}

namespace {

// Augmented Lagrangian of the energy in the scaled variables b = Lambda^(s/2) a.
struct Lagrangian {
  const EigenBasis& basis;
  const Domain& dom;
  Eigen::VectorXd half_mult;  // lambda_k^(s/2)
  double gamma;
  double c;
  double mu = 0.0;
  double rho = 1.0;

  struct Eval {
    double value;
    Eigen::VectorXd grad;
    double g;
    Eigen::VectorXd grad_g;  // in b variables
  };

  Eval operator()(const Eigen::VectorXd& b) const {
    const Eigen::VectorXd a = b.cwiseQuotient(half_mult);
    const Eigen::VectorXd u = basis.synthesize(a);
    const Eigen::VectorXd active = (u.array() - gamma).max(0.0).matrix();
    Eval e;
    e.g = dom.cell_volume() * active.squaredNorm();
    e.grad_g = 2.0 * basis.analyze(active).cwiseQuotient(half_mult);
    const double gap = e.g - c;
    e.value = b.squaredNorm() - mu * gap + 0.5 * rho * gap * gap;
    e.grad = 2.0 * b - (mu - rho * gap) * e.grad_g;
    return e;
  }
};

struct LbfgsResult {
  int iterations = 0;
  bool converged = false;
};

LbfgsResult lbfgs(const Lagrangian& L, Eigen::VectorXd& x, double gtol, int max_iterations) {
  const int memory = 12;
  std::deque<Eigen::VectorXd> ss, ys;
  std::deque<double> rhos;
  auto e = L(x);
  LbfgsResult res;
  for (int it = 0; it < max_iterations; ++it) {
    res.iterations = it + 1;
    if (e.grad.norm() <= gtol) {
      res.converged = true;
      return res;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = e.grad;
    std::vector<double> alpha(ss.size());
    for (int k = static_cast<int>(ss.size()) - 1; k >= 0; --k) {
      const auto ku = static_cast<std::size_t>(k);
      alpha[ku] = rhos[ku] * ss[ku].dot(q);
      q -= alpha[ku] * ys[ku];
    }
    // The energy part of the Hessian is 2 I.
    double scale = 0.5;
    if (!ss.empty()) scale = ss.back().dot(ys.back()) / ys.back().squaredNorm();
    q *= scale;
    for (std::size_t k = 0; k < ss.size(); ++k) {
      const double beta = rhos[k] * ys[k].dot(q);
      q += (alpha[k] - beta) * ss[k];
    }
    Eigen::VectorXd dir = -q;
    double slope = dir.dot(e.grad);
    if (!(slope < 0.0)) {
      ss.clear();
      ys.clear();
      rhos.clear();
      dir = -0.5 * e.grad;
      slope = dir.dot(e.grad);
    }
    // Backtracking on sufficient decrease with a roundoff allowance; the
    // curvature of the accepted step decides whether memory is updated.
    double t = 1.0;
    const double slack = 1e-13 * (std::abs(e.value) + 1.0);
    Lagrangian::Eval trial = L(x + t * dir);
    int backtracks = 0;
    while (trial.value > e.value + 1e-4 * t * slope + slack && backtracks < 50) {
      t *= 0.5;
      trial = L(x + t * dir);
      ++backtracks;
    }
    if (backtracks >= 50) return res;
    const Eigen::VectorXd step = t * dir;
    const Eigen::VectorXd dy = trial.grad - e.grad;
    const double sy = step.dot(dy);
    x += step;
    e = std::move(trial);
    if (sy > 1e-16 * step.norm() * dy.norm()) {
      ss.push_back(step);
      ys.push_back(dy);
      rhos.push_back(1.0 / sy);
      if (static_cast<int>(ss.size()) > memory) {
        ss.pop_front();
        ys.pop_front();
        rhos.pop_front();
      }
    }
  }
  res.converged = e.grad.norm() <= gtol;
  return res;
}

}  // namespace

PlasmaSolution minimize_energy(double c, double gamma, double s, std::shared_ptr<const EigenBasis> basis,
                               const SolverOptions& opts) {
  validate(gamma, s, basis, opts);
  if (!(c > 0.0)) throw std::invalid_argument("minimize_energy: c must be positive");
  if (opts.constraint != ConstraintKind::Quadratic) {
    throw std::invalid_argument("minimize_energy: only the quadratic constraint is differentiable");
  }
  const EigenBasis& b = *basis;
  const Domain& dom = b.domain();
  const Eigen::VectorXd half_mult = fractional_multipliers(b, 0.5 * s);
  const double lam1s = std::pow(b.eigenvalue(0), s);

  // Scale the starting shape onto the constraint set.
  Eigen::VectorXd shape = opts.initial ? *opts.initial : default_guess(b, gamma);
  const Eigen::VectorXd shape_nodal = b.synthesize(shape);
  if (!(shape_nodal.maxCoeff() > 0.0)) throw std::invalid_argument("minimize_energy: initial guess must be positive somewhere");
  auto g_of = [&](double beta) { return constraint_value(dom, beta * shape_nodal, gamma, ConstraintKind::Quadratic) - c; };
  double beta_hi = 2.0 * gamma / shape_nodal.maxCoeff();
  while (g_of(beta_hi) < 0.0) beta_hi *= 2.0;
  std::uintmax_t max_iter = 200;
  const auto root = boost::math::tools::toms748_solve(g_of, gamma / shape_nodal.maxCoeff(), beta_hi,
                                                      boost::math::tools::eps_tolerance<double>(50), max_iter);
  Eigen::VectorXd x = (0.5 * (root.first + root.second) * shape).cwiseProduct(half_mult);

  Lagrangian L{b, dom, half_mult, gamma, c};
  {
    const auto e0 = L(x);
    L.mu = 2.0 * x.dot(e0.grad_g) / e0.grad_g.squaredNorm();
  }
  L.rho = 10.0 * lam1s / c;

  PlasmaSolution sol = blank_solution(basis, zeros(b));
  sol.gamma = gamma;
  sol.s = s;
  sol.c = c;
  const double ctol = opts.constraint_tolerance * c;
  double gtol = 1e-6;
  for (int outer = 0; outer < 100; ++outer) {
    const auto inner = lbfgs(L, x, gtol, opts.max_iterations);
    sol.iterations += inner.iterations;
    const auto e = L(x);
    L.mu -= L.rho * (e.g - c);
    sol.u = SpectralField(basis, x.cwiseQuotient(half_mult));
    sol.lambda = L.mu;
    sol.residual = plasma_residual(sol.u, L.mu, gamma, s);
    sol.trace.push_back(sol.residual);
    if (sol.residual <= opts.tolerance && std::abs(e.g - c) <= ctol) {
      sol.status = SolveStatus::Converged;
      return sol;
    }
    if (!inner.converged && gtol <= 1e-13) {
      sol.status = SolveStatus::Stagnated;
      sol.message = "descent stalled before reaching the stationarity tolerance";
      return sol;
    }
    gtol = std::max(gtol * 0.1, 1e-14);
  }
  sol.status = SolveStatus::Stagnated;
  sol.message = "multiplier updates did not converge";
  return sol;
}

Eigen::VectorXd steiner_symmetrize(const Domain& domain, const Eigen::VectorXd& values, int axis) {
  if (axis < 0 || axis >= domain.dim()) throw std::invalid_argument("steiner_symmetrize: invalid axis");
  if (!domain.is_symmetric(axis)) {
    throw std::invalid_argument("steiner_symmetrize: domain is not symmetric about the mid-hyperplane of axis " +
                                std::to_string(axis));
  }
  if (static_cast<std::size_t>(values.size()) != domain.interior_count()) {
    throw std::invalid_argument("steiner_symmetrize: field size does not match the interior node count");
  }
  const int n = domain.nodes_per_axis();
  const int lines = domain.dim() == 1 ? 1 : n;
  // Line positions ordered by distance from the midpoint, left first on ties.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [n](int p, int q) {
    return std::abs(2 * p - (n - 1)) < std::abs(2 * q - (n - 1));
  });

  Eigen::VectorXd out = values;
  std::vector<double> line_values;
  std::vector<std::ptrdiff_t> slots;
  for (int line = 0; line < lines; ++line) {
    auto slot_at = [&](int pos) {
      const std::size_t g = domain.dim() == 1 ? domain.grid_index(pos)
                                              : (axis == 0 ? domain.grid_index(pos, line) : domain.grid_index(line, pos));
      return domain.interior_slot(g);
    };
    line_values.clear();
    slots.clear();
    for (int pos : order) {
      const auto slot = slot_at(pos);
      if (slot < 0) continue;
      slots.push_back(slot);
      line_values.push_back(values[slot]);
    }
    std::sort(line_values.begin(), line_values.end(), std::greater<>());
    for (std::size_t k = 0; k < slots.size(); ++k) out[slots[k]] = line_values[k];
  }
  return out;
}

}  // namespace fracplasma
