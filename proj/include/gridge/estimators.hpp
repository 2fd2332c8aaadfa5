#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>

#include "gridge/glasso.hpp"
#include "gridge/matcore.hpp"

namespace gridge {

/// Elastic-net tuning: overall strength lambda >= 0 and L1 share alpha in [0, 1].
struct TuningParams {
  double lambda = 1.0;
  double alpha = 0.0;

  void validate() const {
    require(std::isfinite(lambda) && lambda >= 0.0, ErrorKind::InvalidInput,
            "lambda must be finite and >= 0");
    require(alpha >= 0.0 && alpha <= 1.0, ErrorKind::InvalidInput, "alpha must lie in [0, 1]");
  }
};

/// Tuning of the generalized estimator: lambda1 blends S with Gamma,
/// lambda2 is the ridge strength toward T.
struct GenTuningParams {
  double lambda1 = 0.0;
  double lambda2 = 1.0;

  void validate() const {
    require(lambda1 >= 0.0 && lambda1 <= 1.0, ErrorKind::InvalidInput,
            "lambda1 must lie in [0, 1]");
    require(std::isfinite(lambda2) && lambda2 >= 0.0, ErrorKind::InvalidInput,
            "lambda2 must be finite and >= 0");
  }
};

// Target kinds.
struct ZeroTarget {};
struct IdentityTarget {};
struct ScalarNuTarget {};  // nu * I with nu = p^2 / tr(S)
struct ScalarGammaTarget {
  double gamma = 1.0;
};
struct CustomTarget {
  SymMatrix matrix;
};

using TargetSpec =
    std::variant<ZeroTarget, IdentityTarget, ScalarNuTarget, ScalarGammaTarget, CustomTarget>;

inline std::string target_name(const TargetSpec& t) {
  struct {
    std::string operator()(const ZeroTarget&) const { return "zero"; }
    std::string operator()(const IdentityTarget&) const { return "identity"; }
    std::string operator()(const ScalarNuTarget&) const { return "nu"; }
    std::string operator()(const ScalarGammaTarget& g) const {
      return "gamma=" + std::to_string(g.gamma);
    }
    std::string operator()(const CustomTarget&) const { return "custom"; }
  } visitor;
  return std::visit(visitor, t);
}

/// Resolves a target against the sample covariance it will be used with.
inline SymMatrix resolve_target(const TargetSpec& spec, const SymMatrix& s) {
  const Eigen::Index p = s.dim();
  struct {
    Eigen::Index p;
    const SymMatrix& s;
    SymMatrix operator()(const ZeroTarget&) const { return SymMatrix::zero(p); }
    SymMatrix operator()(const IdentityTarget&) const { return SymMatrix::identity(p); }
    SymMatrix operator()(const ScalarNuTarget&) const {
      const double tr = s.trace();
      require(tr > 0.0, ErrorKind::InvalidInput, "nu target requires tr(S) > 0");
      return SymMatrix::scalar(p, static_cast<double>(p * p) / tr);
    }
    SymMatrix operator()(const ScalarGammaTarget& g) const {
      require(g.gamma >= 0.0, ErrorKind::InvalidInput, "gamma target must be >= 0");
      return SymMatrix::scalar(p, g.gamma);
    }
    SymMatrix operator()(const CustomTarget& c) const {
      require(c.matrix.dim() == p, ErrorKind::InvalidInput, "custom target dimension mismatch");
      require(min_eigenvalue(c.matrix) >= -kPsdClamp, ErrorKind::NotPositiveSemiDefinite,
              "custom target is not positive semi-definite");
      return c.matrix;
    }
  } visitor{p, s};
  return std::visit(visitor, spec);
}

namespace detail {

inline void require_same_dim(const SymMatrix& a, const SymMatrix& b, const char* where) {
  require(a.dim() == b.dim(), ErrorKind::InvalidInput, std::string(where) + ": dimension mismatch");
}

inline void require_positive(double lambda, const char* where) {
  require(std::isfinite(lambda) && lambda > 0.0, ErrorKind::InvalidInput,
          std::string(where) + ": lambda must be finite and > 0");
}

// (shift I + 1/4 D^2)^{1/2}
inline SymMatrix ridge_root(const SymMatrix& d, double shift) {
  const Matrix d2 = d.mat() * d.mat();
  Matrix m = 0.25 * d2;
  m.diagonal().array() += shift;
  return spd_sqrt(SymMatrix(m));
}

// [(shift I + 1/4 D^2)^{1/2} + 1/2 D]^{-1}
inline SymMatrix ridge_closed_form(const SymMatrix& d, double shift) {
  const SymMatrix root = ridge_root(d, shift);
  return spd_inverse(root + 0.5 * d);
}

}  // namespace detail

/// [(1 - lambda) S + lambda Gamma]^{-1}, lambda in (0, 1].
inline SymMatrix archetype1(const SymMatrix& s, const SymMatrix& gamma, double lambda) {
  detail::require_same_dim(s, gamma, "archetype1");
  require(lambda > 0.0 && lambda <= 1.0, ErrorKind::InvalidInput,
          "archetype1: lambda must lie in (0, 1]");
  return spd_inverse((1.0 - lambda) * s + lambda * gamma);
}

/// [S + lambda I]^{-1}.
inline SymMatrix archetype2(const SymMatrix& s, double lambda) {
  detail::require_positive(lambda, "archetype2");
  return spd_inverse(s + SymMatrix::scalar(s.dim(), lambda));
}

/// Type-I alternative ridge, inverse form:
/// [(lambda I + 1/4 (S - lambda T)^2)^{1/2} + 1/2 (S - lambda T)]^{-1}.
inline SymMatrix alt_ridge_I(const SymMatrix& s, const SymMatrix& t, double lambda) {
  detail::require_same_dim(s, t, "alt_ridge_I");
  detail::require_positive(lambda, "alt_ridge_I");
  require(is_positive_definite(t, 0.0), ErrorKind::NotPositiveDefinite,
          "alt_ridge_I: target must be positive definite");
  return detail::ridge_closed_form(s - lambda * t, lambda);
}

/// Type-I alternative ridge without the outer inversion:
/// (1/lambda) [(lambda I + 1/4 (S - lambda T)^2)^{1/2} - 1/2 (S - lambda T)].
inline SymMatrix alt_ridge_I_noinv(const SymMatrix& s, const SymMatrix& t, double lambda) {
  detail::require_same_dim(s, t, "alt_ridge_I_noinv");
  detail::require_positive(lambda, "alt_ridge_I_noinv");
  require(is_positive_definite(t, 0.0), ErrorKind::NotPositiveDefinite,
          "alt_ridge_I_noinv: target must be positive definite");
  const SymMatrix d = s - lambda * t;
  return (1.0 / lambda) * (detail::ridge_root(d, lambda) - 0.5 * d);
}

/// Type-II alternative ridge (zero target): [(lambda I + 1/4 S^2)^{1/2} + 1/2 S]^{-1}.
inline SymMatrix alt_ridge_II(const SymMatrix& s, double lambda) {
  detail::require_positive(lambda, "alt_ridge_II");
  return detail::ridge_closed_form(s, lambda);
}

struct TwoStepOptions {
  GlassoConfig glasso{};
  /// Use lambda(1 - alpha) I inside the square root, which is the variant
  /// that solves the dual stationarity equation exactly. The default keeps
  /// lambda I as in the published estimator.
  bool dual_consistent = false;
};

/// Thrown by two_step when the glasso stage does not converge.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, GlassoFit partial)
      : Error(ErrorKind::ConvergenceFailure, what), partial_(std::move(partial)) {}
  const GlassoFit& partial_fit() const { return partial_; }

 private:
  GlassoFit partial_;
};

/// Working covariance used by the ridge stage: S itself when alpha = 0,
/// otherwise the glasso covariance at penalty alpha * lambda.
inline SymMatrix two_step_covariance(const SymMatrix& s, const TuningParams& tp,
                                     const GlassoConfig& cfg = {}) {
  if (tp.alpha == 0.0) return s;
  GlassoFit fit = glasso_fit(s, tp.alpha * tp.lambda, cfg);
  if (!fit.converged)
    throw ConvergenceError("two_step: glasso did not converge in " +
                               std::to_string(fit.iterations) + " sweeps",
                           std::move(fit));
  return fit.w;
}

/// Ridge stage applied to a working covariance W:
/// [(shift I + 1/4 (W - lambda(1-alpha) T)^2)^{1/2} + 1/2 (W - lambda(1-alpha) T)]^{-1}
/// with shift = lambda, or lambda(1 - alpha) for the dual-consistent variant.
inline SymMatrix two_step_from_covariance(const SymMatrix& w, const SymMatrix& t,
                                          const TuningParams& tp, bool dual_consistent = false) {
  const double ridge = tp.lambda * (1.0 - tp.alpha);
  const double shift = dual_consistent ? ridge : tp.lambda;
  const SymMatrix d = w - ridge * t;
  if (shift == 0.0) return spd_inverse(w);  // alpha = 1, dual-consistent: plain W^{-1}
  return detail::ridge_closed_form(d, shift);
}

/// Glasso at penalty alpha * lambda, then the type-I ridge closed form on the
/// glasso working covariance W.
inline SymMatrix two_step(const SymMatrix& s, const SymMatrix& t, const TuningParams& tp,
                          const TwoStepOptions& opts = {}) {
  detail::require_same_dim(s, t, "two_step");
  tp.validate();
  detail::require_positive(tp.lambda, "two_step");
  require(t.is_diagonal(), ErrorKind::InvalidInput, "two_step: target must be diagonal");
  require(t.mat().diagonal().minCoeff() >= 0.0, ErrorKind::InvalidInput,
          "two_step: target must be positive semi-definite");
  const SymMatrix w = two_step_covariance(s, tp, opts.glasso);
  return two_step_from_covariance(w, t, tp, opts.dual_consistent);
}

/// [(lambda2 I + 1/4 M^2)^{1/2} + 1/2 M]^{-1},
/// M = (1 - lambda1) S + lambda1 Gamma - lambda2 T.
inline SymMatrix generalized(const SymMatrix& s, const SymMatrix& gamma, const SymMatrix& t,
                             const GenTuningParams& gp) {
  detail::require_same_dim(s, gamma, "generalized");
  detail::require_same_dim(s, t, "generalized");
  gp.validate();
  const SymMatrix blend = (1.0 - gp.lambda1) * s + gp.lambda1 * gamma;
  if (gp.lambda2 == 0.0) return spd_inverse(blend);
  return detail::ridge_closed_form(blend - gp.lambda2 * t, gp.lambda2);
}

/// logdet(Theta) - tr(S Theta) - lambda (alpha |Theta|_1 + (1-alpha)/2 |Theta - T|_F^2).
inline double en_objective(const SymMatrix& theta, const SymMatrix& s, const SymMatrix& t,
                           const TuningParams& tp) {
  detail::require_same_dim(theta, s, "en_objective");
  detail::require_same_dim(theta, t, "en_objective");
  tp.validate();
  const double fro = (theta - t).mat().squaredNorm();
  return logdet(theta) - s.mat().cwiseProduct(theta.mat()).sum() -
         tp.lambda * (tp.alpha * l1_norm(theta) + 0.5 * (1.0 - tp.alpha) * fro);
}

/// max-abs of Theta^{-1} - S - lambda (Theta - T), the ridge normal equation.
inline double ridge_stationarity_residual(const SymMatrix& theta, const SymMatrix& s,
                                          const SymMatrix& t, double lambda) {
  const Matrix r = spd_inverse(theta).mat() - s.mat() - lambda * (theta.mat() - t.mat());
  return max_abs(r);
}

/// max-abs of (S - lambda T) Theta + lambda Theta^2 - I.
inline double riccati_residual(const SymMatrix& theta, const SymMatrix& s, const SymMatrix& t,
                               double lambda) {
  const Matrix& th = theta.mat();
  const Matrix r = (s.mat() - lambda * t.mat()) * th + lambda * th * th -
                   Matrix::Identity(th.rows(), th.cols());
  return max_abs(r);
}

}  // namespace gridge
