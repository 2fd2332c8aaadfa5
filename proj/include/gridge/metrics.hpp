#pragma once

#include <cmath>

#include "gridge/matcore.hpp"

namespace gridge {

struct LossReport {
  double kl = 0.0;
  double l2 = 0.0;
  double ql = 0.0;
  double sp = 0.0;
};

inline void require_dims(const SymMatrix& a, const SymMatrix& b, const char* where) {
  require(a.dim() == b.dim(), ErrorKind::InvalidInput, std::string(where) + ": dimension mismatch");
}

/// tr(Sigma Theta_hat) - logdet(Sigma Theta_hat) - p. Values in (-1e-10, 0)
/// are floating-point noise and reported as 0.
inline double kl_loss(const SymMatrix& sigma, const SymMatrix& theta_hat) {
  require_dims(sigma, theta_hat, "kl_loss");
  require(is_positive_definite(sigma, 0.0) && is_positive_definite(theta_hat, 0.0),
          ErrorKind::NotPositiveDefinite, "kl_loss: arguments must be positive definite");
  const double tr = sigma.mat().cwiseProduct(theta_hat.mat()).sum();
  const double v = tr - logdet(sigma) - logdet(theta_hat) - static_cast<double>(sigma.dim());
  return (v < 0.0 && v > -1e-10) ? 0.0 : v;
}

inline double l2_loss(const SymMatrix& theta, const SymMatrix& theta_hat) {
  require_dims(theta, theta_hat, "l2_loss");
  return frobenius_norm(theta - theta_hat);
}

/// tr((Sigma Theta_hat - I)^2).
inline double ql_loss(const SymMatrix& sigma, const SymMatrix& theta_hat) {
  require_dims(sigma, theta_hat, "ql_loss");
  Matrix m = sigma.mat() * theta_hat.mat();
  m.diagonal().array() -= 1.0;
  return (m * m).trace();
}

/// Largest singular value of (Theta - Theta_hat)^2. With squared = false the
/// difference itself is used.
inline double sp_loss(const SymMatrix& theta, const SymMatrix& theta_hat, bool squared = true) {
  require_dims(theta, theta_hat, "sp_loss");
  const SymMatrix d = theta - theta_hat;
  if (!squared) return spectral_norm(d);
  return spectral_norm(SymMatrix(Matrix(d.mat() * d.mat())));
}

inline LossReport evaluate_losses(const SymMatrix& sigma, const SymMatrix& theta,
                                  const SymMatrix& theta_hat) {
  return {kl_loss(sigma, theta_hat), l2_loss(theta, theta_hat), ql_loss(sigma, theta_hat),
          sp_loss(theta, theta_hat)};
}

}  // namespace gridge
