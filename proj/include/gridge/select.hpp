#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "gridge/estimators.hpp"
#include "gridge/glasso.hpp"
#include "gridge/parallel.hpp"
#include "gridge/simgen.hpp"

namespace gridge {

enum class Method { Glasso, AltRidgeI, AltRidgeII, Archetype1, Archetype2, TwoStep };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::Glasso: return "glasso";
    case Method::AltRidgeI: return "alt_ridge_I";
    case Method::AltRidgeII: return "alt_ridge_II";
    case Method::Archetype1: return "archetype1";
    case Method::Archetype2: return "archetype2";
    case Method::TwoStep: return "two_step";
  }
  return "unknown";
}

inline Method parse_method(const std::string& s) {
  for (auto m : {Method::Glasso, Method::AltRidgeI, Method::AltRidgeII, Method::Archetype1,
                 Method::Archetype2, Method::TwoStep})
    if (method_name(m) == s) return m;
  fail(ErrorKind::InvalidInput, "unknown estimator '" + s + "'");
}

inline bool uses_alpha(Method m) { return m == Method::TwoStep; }

struct EstimatorSpec {
  Method method = Method::TwoStep;
  TargetSpec target = IdentityTarget{};
  TwoStepOptions options{};
};

/// Fits one estimator at (lambda, alpha). The target is resolved against `s`;
/// alpha is ignored by every method except two_step. Glasso uses rho = lambda.
inline SymMatrix fit_estimator(const EstimatorSpec& spec, const SymMatrix& s, double lambda,
                               double alpha = 0.0) {
  switch (spec.method) {
    case Method::Glasso: {
      GlassoFit fit = glasso_fit(s, lambda, spec.options.glasso);
      if (!fit.converged) throw ConvergenceError("glasso did not converge", std::move(fit));
      return fit.theta;
    }
    case Method::AltRidgeI: return alt_ridge_I(s, resolve_target(spec.target, s), lambda);
    case Method::AltRidgeII: return alt_ridge_II(s, lambda);
    case Method::Archetype1: return archetype1(s, resolve_target(spec.target, s), lambda);
    case Method::Archetype2: return archetype2(s, lambda);
    case Method::TwoStep:
      return two_step(s, resolve_target(spec.target, s), {lambda, alpha}, spec.options);
  }
  fail(ErrorKind::InvalidInput, "fit_estimator: unknown method");
}

/// 25 log-spaced values in [1e-3, 10].
inline std::vector<double> default_lambda_grid() {
  std::vector<double> g(25);
  for (int i = 0; i < 25; ++i) g[static_cast<size_t>(i)] = std::pow(10.0, -3.0 + 4.0 * i / 24.0);
  return g;
}

/// 11 values 0, 0.1, ..., 1.
inline std::vector<double> default_alpha_grid() {
  std::vector<double> g(11);
  for (int i = 0; i < 11; ++i) g[static_cast<size_t>(i)] = i / 10.0;
  return g;
}

struct CvConfig {
  int folds = 5;
  std::vector<double> lambda_grid = default_lambda_grid();
  std::vector<double> alpha_grid = default_alpha_grid();
  std::uint64_t seed = 0;

  void validate() const {
    require(folds >= 2, ErrorKind::InvalidInput, "cv: folds must be >= 2");
    require(!lambda_grid.empty() && !alpha_grid.empty(), ErrorKind::InvalidInput,
            "cv: grids must be non-empty");
    for (double l : lambda_grid)
      require(l > 0.0 && l <= 10.0, ErrorKind::InvalidInput, "cv: lambda grid must lie in (0, 10]");
    for (double a : alpha_grid)
      require(a >= 0.0 && a <= 1.0, ErrorKind::InvalidInput, "cv: alpha grid must lie in [0, 1]");
  }
};

struct GridPoint {
  double lambda = 0.0;
  double alpha = 0.0;
  double mean_score = std::numeric_limits<double>::quiet_NaN();
  double sd_score = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty when every fold succeeded

  bool ok() const { return error.empty(); }
};

struct CvResult {
  double best_lambda = 0.0;
  double best_alpha = 0.0;
  std::vector<GridPoint> score_surface;  // lambda-major, both axes ascending
  std::vector<int> fold_assignments;
};

/// Random fold labels with sizes differing by at most one.
inline std::vector<int> kfold_split(std::size_t n, int folds, std::uint64_t seed) {
  require(folds >= 1, ErrorKind::InvalidInput, "kfold_split: folds must be >= 1");
  require(n >= static_cast<std::size_t>(folds), ErrorKind::InvalidInput,
          "kfold_split: need at least as many rows as folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> assign(n);
  for (std::size_t pos = 0; pos < n; ++pos)
    assign[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  return assign;
}

/// Held-out Gaussian log-likelihood logdet(Theta) - tr(S_heldout Theta).
inline double cv_score(const SymMatrix& theta_hat, const SymMatrix& s_heldout) {
  require(theta_hat.dim() == s_heldout.dim(), ErrorKind::InvalidInput,
          "cv_score: dimension mismatch");
  return logdet(theta_hat) - s_heldout.mat().cwiseProduct(theta_hat.mat()).sum();
}

inline Matrix select_rows(const Matrix& x, const std::vector<int>& assign, int fold, bool in) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < assign.size(); ++i)
    if ((assign[i] == fold) == in) rows.push_back(static_cast<Eigen::Index>(i));
  return x(rows, Eigen::all);
}

namespace detail {

inline std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace detail

/// Exhaustive K-fold search over the (lambda, alpha) grid maximizing the mean
/// held-out log-likelihood. Ties go to the larger lambda, then the smaller alpha.
inline CvResult grid_search(const Matrix& x, const EstimatorSpec& spec, const CvConfig& cfg,
                            int threads = 1) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(x.rows());
  CvResult out;
  out.fold_assignments = kfold_split(n, cfg.folds, cfg.seed);

  std::vector<SymMatrix> s_train, s_held;
  for (int f = 0; f < cfg.folds; ++f) {
    s_train.push_back(sample_cov(select_rows(x, out.fold_assignments, f, false)));
    s_held.push_back(sample_cov(select_rows(x, out.fold_assignments, f, true)));
  }

  const auto lambdas = detail::sorted_unique(cfg.lambda_grid);
  const auto alphas =
      uses_alpha(spec.method) ? detail::sorted_unique(cfg.alpha_grid) : std::vector<double>{0.0};
  out.score_surface.resize(lambdas.size() * alphas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    for (std::size_t j = 0; j < alphas.size(); ++j) {
      auto& pt = out.score_surface[i * alphas.size() + j];
      pt.lambda = lambdas[i];
      pt.alpha = alphas[j];
    }

  parallel_for(out.score_surface.size(), threads, [&](std::size_t k) {
    GridPoint& pt = out.score_surface[k];
    std::vector<double> scores;
    try {
      for (int f = 0; f < cfg.folds; ++f) {
        const SymMatrix theta =
            fit_estimator(spec, s_train[static_cast<size_t>(f)], pt.lambda, pt.alpha);
        scores.push_back(cv_score(theta, s_held[static_cast<size_t>(f)]));
      }
    } catch (const std::exception& e) {
      pt.error = e.what();
      return;
    }
    const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / scores.size();
    double ss = 0.0;
    for (double v : scores) ss += (v - mean) * (v - mean);
    pt.mean_score = mean;
    pt.sd_score = std::sqrt(ss / static_cast<double>(scores.size() - 1));
  });

  const GridPoint* best = nullptr;
  for (const auto& pt : out.score_surface) {
    if (!pt.ok() || !std::isfinite(pt.mean_score)) continue;
    if (!best || pt.mean_score > best->mean_score ||
        (pt.mean_score == best->mean_score &&
         (pt.lambda > best->lambda || (pt.lambda == best->lambda && pt.alpha < best->alpha))))
      best = &pt;
  }
  if (!best) {
    std::string msg = "grid_search: every grid point failed";
    int listed = 0;
    for (const auto& pt : out.score_surface) {
      if (listed++ == 5) {
        msg += "; ...";
        break;
      }
      msg += "; (" + std::to_string(pt.lambda) + ", " + std::to_string(pt.alpha) + "): " +
             pt.error;
    }
    fail(ErrorKind::SelectionFailure, msg);
  }
  out.best_lambda = best->lambda;
  out.best_alpha = best->alpha;
  return out;
}

/// Refit on the full sample at the selected tuning.
inline SymMatrix refit(const Matrix& x, const EstimatorSpec& spec, const CvResult& result) {
  return fit_estimator(spec, sample_cov(x), result.best_lambda, result.best_alpha);
}

}  // namespace gridge
