#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "gridge/estimators.hpp"
#include "gridge/glasso.hpp"
#include "gridge/matcore.hpp"
#include "gridge/parallel.hpp"

namespace gridge {

/// Box-constrained dual of the elastic-net problem: minimize over symmetric U
/// with |U|_inf <= lambda * alpha. Requires a strictly positive ridge share
/// lambda (1 - alpha) so the inner problem has the closed form below.
struct DualProblem {
  SymMatrix s;
  SymMatrix t;
  TuningParams tp;

  double ridge() const { return tp.lambda * (1.0 - tp.alpha); }
  double box() const { return tp.lambda * tp.alpha; }

  void validate() const {
    tp.validate();
    require(s.dim() == t.dim(), ErrorKind::InvalidInput, "dual problem: dimension mismatch");
    require(tp.lambda > 0.0, ErrorKind::InvalidInput, "dual problem: lambda must be > 0");
    require(tp.alpha < 1.0, ErrorKind::InvalidInput, "dual problem: alpha must be < 1");
  }
};

struct DualSolution {
  SymMatrix u_star;
  SymMatrix theta_star;
  double objective_value = 0.0;
  int solver_iterations = 0;
  int restart = 0;  // index of the winning start
};

struct DualSolverConfig {
  int restarts = 8;
  int max_sweeps = 20000;
  double tol = 1e-10;  // objective change between sweeps
  std::uint64_t seed = 0;
  int grid_points = 11;  // per axis, p = 2 grid search
  int threads = 1;
};

namespace detail {

struct DualParts {
  SymMatrix a;  // 1/2 (S + U - c T)
  SymMatrix b;  // (1/c) [(A^2 + c I)^{1/2} - A]
};

inline DualParts dual_parts(const SymMatrix& u, const DualProblem& prob) {
  const double c = prob.ridge();
  const SymMatrix a = 0.5 * (prob.s + u - c * prob.t);
  Matrix sq = a.mat() * a.mat();
  sq.diagonal().array() += c;
  const SymMatrix b = (1.0 / c) * (spd_sqrt(SymMatrix(sq)) - a);
  return {a, b};
}

inline void check_box(const SymMatrix& u, const DualProblem& prob) {
  require(u.dim() == prob.s.dim(), ErrorKind::InvalidInput, "dual: U dimension mismatch");
  require(max_abs(u.mat()) <= prob.box() + 1e-12, ErrorKind::InvalidInput,
          "dual: U violates the box |U|_inf <= lambda * alpha");
}

}  // namespace detail

/// Inner maximizer Theta*(U) = (1/c)[(A^2 + c I)^{1/2} - A], c = lambda (1 - alpha).
inline SymMatrix dual_theta(const SymMatrix& u, const DualProblem& prob) {
  prob.validate();
  detail::check_box(u, prob);
  return detail::dual_parts(u, prob).b;
}

/// logdet(B) - tr(B A). This is the canonical dual objective; it is convex in
/// U and is minimized over the box.
inline double dual_objective(const SymMatrix& u, const DualProblem& prob) {
  prob.validate();
  detail::check_box(u, prob);
  const auto [a, b] = detail::dual_parts(u, prob);
  require(b.is_finite() && min_eigenvalue(b) > 0.0, ErrorKind::NumericalFailure,
          "dual_objective: B is not positive definite");
  return logdet(b) - (b.mat() * a.mat()).trace();
}

/// tr(log(B) - B A), the same objective with the matrix logarithm.
inline double dual_objective_tracelog(const SymMatrix& u, const DualProblem& prob) {
  prob.validate();
  detail::check_box(u, prob);
  const auto [a, b] = detail::dual_parts(u, prob);
  const EigenDecomp e = sym_eigen(b);
  require(e.values.minCoeff() > 0.0, ErrorKind::NumericalFailure,
          "dual_objective_tracelog: B is not positive definite");
  const SymMatrix log_b = apply_spectral(e, [](double v) { return std::log(v); });
  return (log_b.mat() - b.mat() * a.mat()).trace();
}

/// Spectral form for T = gamma I:
///   sum_i log(sqrt(b_i^2 + c) + b_i) + (1/c) b_i (sqrt(b_i^2 + c) - b_i),
/// b_i = 1/2 (eig_i(S + U) - c gamma). Equals -dual_objective.
inline double dual_objective_eig(const SymMatrix& u, const DualProblem& prob, double gamma) {
  prob.validate();
  detail::check_box(u, prob);
  const double c = prob.ridge();
  const Vector eig = sym_eigen(prob.s + u).values;
  double total = 0.0;
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    const double b = 0.5 * (eig(i) - c * gamma);
    const double r = std::sqrt(b * b + c);
    total += std::log(r + b) + b * (r - b) / c;
  }
  return total;
}

namespace detail {

inline Matrix random_box_matrix(Eigen::Index p, double box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-box, box);
  Matrix u = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = unif(rng);
      u(i, j) = v;
      u(j, i) = v;
    }
  return u;
}

inline double clamp_box(double v, double box) { return std::min(box, std::max(-box, v)); }

// Derivative of the canonical objective along the (i, j) coordinate pair.
inline double dual_partial(const Matrix& u, const DualProblem& prob, Eigen::Index i,
                           Eigen::Index j) {
  const SymMatrix theta = dual_parts(SymMatrix(u), prob).b;
  return (i == j) ? -theta(i, i) : -2.0 * theta(i, j);
}

struct CdResult {
  Matrix u;
  double objective = 0.0;
  int sweeps = 0;
  bool converged = false;
};

// Projected coordinate descent with exact line minimization: each coordinate
// subproblem is convex on [-box, box], so its minimizer is found by bisection
// on the sign of the partial derivative.
inline CdResult dual_coordinate_descent(Matrix u, const DualProblem& prob,
                                        const DualSolverConfig& cfg) {
  const Eigen::Index p = u.rows();
  const double box = prob.box();
  CdResult out;
  double prev = dual_objective(SymMatrix(u), prob);
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    double max_move = 0.0;
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index i = 0; i <= j; ++i) {
        const double old = u(i, j);
        auto at = [&](double v) {
          u(i, j) = v;
          u(j, i) = v;
          return dual_partial(u, prob, i, j);
        };
        double next;
        if (box == 0.0) {
          next = 0.0;
        } else if (at(box) <= 0.0) {
          next = box;
        } else if (at(-box) >= 0.0) {
          next = -box;
        } else {
          double lo = -box, hi = box;
          for (int k = 0; k < 80 && hi - lo > 1e-15; ++k) {
            const double mid = 0.5 * (lo + hi);
            if (at(mid) > 0.0) hi = mid;
            else lo = mid;
          }
          next = 0.5 * (lo + hi);
        }
        u(i, j) = next;
        u(j, i) = next;
        max_move = std::max(max_move, std::abs(next - old));
      }
    const double obj = dual_objective(SymMatrix(u), prob);
    out.sweeps = sweep + 1;
    const double change = std::abs(prev - obj);
    prev = obj;
    if (change < cfg.tol && max_move < 1e-10) {
      out.converged = true;
      break;
    }
  }
  out.u = u;
  out.objective = prev;
  return out;
}

// Zooming grid search over (u11, u22, u12) for p = 2.
inline Matrix dual_grid_2x2(const DualProblem& prob, int points) {
  const double box = prob.box();
  double lo[3] = {-box, -box, -box}, hi[3] = {box, box, box};
  double best_val = std::numeric_limits<double>::infinity();
  double best[3] = {0.0, 0.0, 0.0};
  const int n = std::max(points, 3);
  for (int level = 0; level < 200; ++level) {
    double step[3];
    for (int d = 0; d < 3; ++d) step[d] = (hi[d] - lo[d]) / (n - 1);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          const double v[3] = {lo[0] + a * step[0], lo[1] + b * step[1], lo[2] + c * step[2]};
          Matrix u(2, 2);
          u << v[0], v[2], v[2], v[1];
          const double f = dual_objective(SymMatrix(u), prob);
          if (f < best_val) {
            best_val = f;
            best[0] = v[0];
            best[1] = v[1];
            best[2] = v[2];
          }
        }
    double widest = 0.0;
    for (int d = 0; d < 3; ++d) {
      lo[d] = clamp_box(best[d] - 2.0 * step[d], box);
      hi[d] = clamp_box(best[d] + 2.0 * step[d], box);
      widest = std::max(widest, hi[d] - lo[d]);
    }
    if (widest < 1e-12) break;
  }
  Matrix u(2, 2);
  u << best[0], best[2], best[2], best[1];
  return u;
}

}  // namespace detail

/// Numerical minimizer of the canonical dual objective over the box.
/// p = 2: zooming dense grid over all three free entries, polished by
/// coordinate descent. p in [3, 10]: projected coordinate descent from
/// `restarts` random starts; the best objective wins, ties to the lowest start.
inline DualSolution solve_dual_numeric(const DualProblem& prob, const DualSolverConfig& cfg = {}) {
  prob.validate();
  const Eigen::Index p = prob.s.dim();
  require(p <= 10, ErrorKind::UnsupportedDimension, "solve_dual_numeric: p must be <= 10");
  require(cfg.restarts >= 1, ErrorKind::InvalidInput, "solve_dual_numeric: restarts >= 1");

  std::vector<Matrix> starts;
  if (p == 2) {
    starts.push_back(detail::dual_grid_2x2(prob, cfg.grid_points));
  } else {
    for (int r = 0; r < cfg.restarts; ++r)
      starts.push_back(
          detail::random_box_matrix(p, prob.box(), cfg.seed + static_cast<std::uint64_t>(r)));
  }

  std::vector<detail::CdResult> runs(starts.size());
  parallel_for(starts.size(), cfg.threads, [&](std::size_t k) {
    runs[k] = detail::dual_coordinate_descent(starts[k], prob, cfg);
  });

  int winner = -1;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    if (!runs[k].converged) continue;
    if (winner < 0 || runs[k].objective < runs[static_cast<std::size_t>(winner)].objective)
      winner = static_cast<int>(k);
  }
  require(winner >= 0, ErrorKind::ConvergenceFailure,
          "solve_dual_numeric: no start converged within max_sweeps");

  const auto& best = runs[static_cast<std::size_t>(winner)];
  DualSolution sol;
  sol.u_star = SymMatrix(best.u);
  sol.theta_star = detail::dual_parts(sol.u_star, prob).b;
  sol.objective_value = best.objective;
  sol.solver_iterations = best.sweeps;
  sol.restart = winner;
  return sol;
}

/// Dual variable realized by glasso at penalty lambda * alpha: U = W - S.
inline SymMatrix glasso_dual_u(const DualProblem& prob, const GlassoConfig& cfg = {1000000, 1e-13}) {
  prob.validate();
  const GlassoFit fit = glasso_fit(prob.s, prob.box(), cfg);
  require(fit.converged, ErrorKind::ConvergenceFailure, "glasso_dual_u: glasso did not converge");
  return fit.w - prob.s;
}

struct DualComparison {
  DualSolution dual;
  SymMatrix u_glasso;
  SymMatrix theta_two_step;
  double theta_max_diff = 0.0;
  Matrix u_abs_diff;  // |U_dual - U_glasso| entrywise
};

/// Builds Theta from the numerical dual optimizer and from the two-step
/// estimator (dual-consistent shift) and measures their agreement.
inline DualComparison compare_dual_detailed(const DualProblem& prob,
                                            const DualSolverConfig& cfg = {}) {
  prob.validate();
  require(prob.t.is_diagonal(), ErrorKind::InvalidInput, "compare: target must be diagonal");
  DualComparison out;
  out.dual = solve_dual_numeric(prob, cfg);
  out.u_glasso = glasso_dual_u(prob);
  const SymMatrix w = prob.s + out.u_glasso;
  out.theta_two_step = two_step_from_covariance(w, prob.t, prob.tp, /*dual_consistent=*/true);
  out.theta_max_diff = max_abs(out.dual.theta_star.mat() - out.theta_two_step.mat());
  out.u_abs_diff = (out.dual.u_star.mat() - out.u_glasso.mat()).cwiseAbs();
  return out;
}

inline double compare_with_two_step(const DualProblem& prob, const DualSolverConfig& cfg = {}) {
  return compare_dual_detailed(prob, cfg).theta_max_diff;
}

}  // namespace gridge
