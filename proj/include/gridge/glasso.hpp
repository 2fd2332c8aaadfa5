#pragma once

#include <cmath>
#include <vector>

#include "gridge/matcore.hpp"

namespace gridge {

struct GlassoConfig {
  int max_iter = 1000;
  double tol = 1e-6;  // mean absolute change of W per sweep
};

struct GlassoFit {
  SymMatrix theta;
  SymMatrix w;
  double rho = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Penalized log-likelihood logdet(T) - tr(S T) - rho |T|_1 evaluated at
  /// T = W^{-1} after every outer sweep.
  std::vector<double> objective_history;
};

namespace detail {

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

// Cyclic coordinate descent for min 0.5 b'Gb - b'c + rho |b|_1, warm started
// from `beta`. Returns the number of sweeps performed.
inline int lasso_cd_inplace(const Matrix& gram, const Vector& target, double rho, double tol,
                            Vector& beta, int max_sweeps = 100000) {
  const Eigen::Index m = gram.rows();
  Vector g = gram * beta;
  int sweeps = 0;
  while (sweeps < max_sweeps) {
    ++sweeps;
    double max_delta = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      const double gkk = gram(k, k);
      const double r = target(k) - g(k) + gkk * beta(k);
      const double next = soft_threshold(r, rho) / gkk;
      const double delta = next - beta(k);
      if (delta != 0.0) {
        g.noalias() += gram.col(k) * delta;
        beta(k) = next;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta < tol) break;
  }
  return sweeps;
}

inline double glasso_primal(const SymMatrix& theta, const SymMatrix& s, double rho) {
  return logdet(theta) - (s.mat().cwiseProduct(theta.mat())).sum() - rho * l1_norm(theta);
}

}  // namespace detail

/// Coordinate-descent solution of min 0.5 b'Gb - b'c + rho |b|_1.
inline Vector lasso_cd(const SymMatrix& gram, const Vector& target, double rho, double tol) {
  require(gram.is_finite() && target.allFinite() && std::isfinite(rho) && std::isfinite(tol),
          ErrorKind::InvalidInput, "lasso_cd: non-finite input");
  require(target.size() == gram.dim(), ErrorKind::InvalidInput, "lasso_cd: dimension mismatch");
  require(rho >= 0.0, ErrorKind::InvalidInput, "lasso_cd: rho must be nonnegative");
  require(tol > 0.0, ErrorKind::InvalidInput, "lasso_cd: tol must be positive");
  require(gram.mat().diagonal().minCoeff() > 0.0, ErrorKind::InvalidInput,
          "lasso_cd: gram diagonal must be positive");
  Vector beta = Vector::Zero(target.size());
  detail::lasso_cd_inplace(gram.mat(), target, rho, tol, beta);
  return beta;
}

/// Graphical lasso by block coordinate descent on the working covariance W
/// (Friedman, Hastie & Tibshirani). The L1 penalty covers the diagonal, so
/// W(i, i) = S(i, i) + rho throughout.
inline GlassoFit glasso_fit(const SymMatrix& s, double rho, const GlassoConfig& cfg = {}) {
  require(s.is_finite(), ErrorKind::InvalidInput, "glasso: non-finite covariance");
  require(std::isfinite(rho) && rho >= 0.0, ErrorKind::InvalidInput,
          "glasso: rho must be finite and nonnegative");
  require(cfg.max_iter >= 1 && cfg.tol > 0.0, ErrorKind::InvalidInput,
          "glasso: max_iter >= 1 and tol > 0 required");
  require(min_eigenvalue(s) >= -kPsdClamp, ErrorKind::NotPositiveSemiDefinite,
          "glasso: covariance is not positive semi-definite");

  const Eigen::Index p = s.dim();
  GlassoFit fit;
  fit.rho = rho;

  if (rho == 0.0) {
    fit.theta = spd_inverse(s);  // SingularMatrix for singular s
    fit.w = s;
    fit.converged = true;
    fit.objective_history.push_back(detail::glasso_primal(fit.theta, s, 0.0));
    return fit;
  }

  Matrix w = s.mat();
  w.diagonal().array() += rho;
  if (p == 1) {
    fit.w = SymMatrix(w);
    fit.theta = SymMatrix(Matrix::Constant(1, 1, 1.0 / w(0, 0)));
    fit.converged = true;
    fit.objective_history.push_back(detail::glasso_primal(fit.theta, s, rho));
    return fit;
  }

  Matrix betas = Matrix::Zero(p - 1, p);
  std::vector<std::vector<Eigen::Index>> others(static_cast<size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < p; ++i)
      if (i != j) others[static_cast<size_t>(j)].push_back(i);

  const double inner_tol = std::max(cfg.tol * 1e-2, 1e-14);
  for (int it = 0; it < cfg.max_iter; ++it) {
    const Matrix w_old = w;
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto& idx = others[static_cast<size_t>(j)];
      const Matrix w11 = w(idx, idx);
      const Vector s12 = s.mat()(idx, j);
      Vector beta = betas.col(j);
      detail::lasso_cd_inplace(w11, s12, rho, inner_tol, beta);
      betas.col(j) = beta;
      const Vector w12 = w11 * beta;
      w(idx, j) = w12;
      w(j, idx) = w12.transpose();
    }
    fit.iterations = it + 1;
    const SymMatrix w_sym(w);
    fit.objective_history.push_back(detail::glasso_primal(spd_inverse(w_sym), s, rho));
    const double change = (w - w_old).cwiseAbs().mean();
    if (change < cfg.tol) {
      fit.converged = true;
      break;
    }
  }

  Matrix theta = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& idx = others[static_cast<size_t>(j)];
    const Vector beta = betas.col(j);
    const Vector w12 = w(idx, j);
    const double tjj = 1.0 / (w(j, j) - w12.dot(beta));
    theta(j, j) = tjj;
    theta(idx, j) = -beta * tjj;
  }
  // Column-wise construction is only symmetric at convergence; keep exact
  // zeros where both halves agree on one.
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = j + 1; i < p; ++i) {
      const double a = theta(i, j), b = theta(j, i);
      const double v = (a == 0.0 && b == 0.0) ? 0.0 : 0.5 * (a + b);
      theta(i, j) = v;
      theta(j, i) = v;
    }
  fit.theta = SymMatrix(theta);
  fit.w = SymMatrix(w);
  return fit;
}

/// Maximum off-diagonal violation of the L1 stationarity conditions
/// W - S = rho * sign(Theta) (box |W - S| <= rho where Theta is zero).
inline double kkt_check(const GlassoFit& fit, const SymMatrix& s, double rho) {
  require(fit.theta.dim() == s.dim() && fit.w.dim() == s.dim(), ErrorKind::InvalidInput,
          "kkt_check: dimension mismatch");
  double worst = 0.0;
  for (Eigen::Index j = 0; j < s.dim(); ++j)
    for (Eigen::Index i = 0; i < s.dim(); ++i) {
      if (i == j) continue;
      const double gap = fit.w(i, j) - s(i, j);
      const double t = fit.theta(i, j);
      const double v = (t == 0.0) ? std::max(0.0, std::abs(gap) - rho)
                                  : std::abs(gap - rho * (t > 0.0 ? 1.0 : -1.0));
      worst = std::max(worst, v);
    }
  return worst;
}

}  // namespace gridge
