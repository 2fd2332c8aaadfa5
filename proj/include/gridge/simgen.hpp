#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "gridge/matcore.hpp"

namespace gridge {

enum class NetworkModel {
  CompoundSymmetry,  // 1: sigma = 1 on the diagonal, 0.6^2 elsewhere
  RandomSparse,      // 2: unit-diagonal standardization of A + aI, cond(A + aI) = p
  WishartLike,       // 3: Theta = Y'Y / 10000, Y standard normal
  Star,              // 4: theta_1k = 0.1 hub
  MovingAverage,     // 5: sigma bands 0.2 and 0.2^2
  DiagDominant,      // 6: scaled symmetric U(0,1) off-diagonal, 1 + U(0, 0.1) diagonal
};

inline std::string network_name(NetworkModel m) {
  switch (m) {
    case NetworkModel::CompoundSymmetry: return "compound_symmetry";
    case NetworkModel::RandomSparse: return "random_sparse";
    case NetworkModel::WishartLike: return "wishart";
    case NetworkModel::Star: return "star";
    case NetworkModel::MovingAverage: return "moving_average";
    case NetworkModel::DiagDominant: return "diag_dominant";
  }
  return "unknown";
}

inline NetworkModel parse_network(const std::string& s) {
  for (auto m : {NetworkModel::CompoundSymmetry, NetworkModel::RandomSparse,
                 NetworkModel::WishartLike, NetworkModel::Star, NetworkModel::MovingAverage,
                 NetworkModel::DiagDominant})
    if (network_name(m) == s) return m;
  if (s.size() == 1 && s[0] >= '1' && s[0] <= '6')
    return static_cast<NetworkModel>(s[0] - '1');
  fail(ErrorKind::InvalidInput, "unknown network model '" + s + "'");
}

struct NetworkSpec {
  NetworkModel model = NetworkModel::CompoundSymmetry;
  Eigen::Index p = 20;
  std::uint64_t seed = 0;
};

struct GroundTruth {
  SymMatrix sigma;
  SymMatrix theta;
  NetworkSpec spec;
};

/// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace detail {

inline GroundTruth from_sigma(const Matrix& sigma, const NetworkSpec& spec) {
  SymMatrix s(sigma);
  require(is_positive_definite(s), ErrorKind::GenerationFailure,
          network_name(spec.model) + ": covariance is not positive definite");
  return {s, spd_inverse(s), spec};
}

inline GroundTruth from_theta(const Matrix& theta, const NetworkSpec& spec) {
  SymMatrix t(theta);
  require(is_positive_definite(t), ErrorKind::GenerationFailure,
          network_name(spec.model) + ": precision is not positive definite");
  return {spd_inverse(t), t, spec};
}

// Condition number of A + aI given A's extreme eigenvalues.
inline double shifted_condition(double top, double bottom, double a) {
  return (top + a) / (bottom + a);
}

// Solves cond(A + aI) = target for a by bisection over [max(0, -bottom), 10 p].
// The condition number is decreasing in a on that interval.
inline double match_condition(const Vector& eig, double target, Eigen::Index p) {
  const double top = eig.maxCoeff(), bottom = eig.minCoeff();
  double lo = std::max(0.0, -bottom);
  double hi = 10.0 * static_cast<double>(p);
  // Just above -bottom the shifted matrix is nearly singular (cond -> inf).
  lo = std::nextafter(lo, hi);
  if (bottom + lo <= 0.0) lo = -bottom + 1e-12 * (1.0 + std::abs(bottom));
  const auto f = [&](double a) { return shifted_condition(top, bottom, a) - target; };
  require(f(lo) >= 0.0 && f(hi) <= 0.0, ErrorKind::GenerationFailure,
          "random_sparse: no shift achieves condition number " + std::to_string(target));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

inline GroundTruth make_network(const NetworkSpec& spec) {
  const Eigen::Index p = spec.p;
  require(p >= 2, ErrorKind::InvalidInput, "make_network: p must be >= 2");
  std::mt19937_64 rng(spec.seed);

  switch (spec.model) {
    case NetworkModel::CompoundSymmetry: {
      Matrix sigma = Matrix::Constant(p, p, 0.6 * 0.6);
      sigma.diagonal().setOnes();
      return detail::from_sigma(sigma, spec);
    }
    case NetworkModel::RandomSparse: {
      std::bernoulli_distribution edge(0.1);
      Matrix a = Matrix::Zero(p, p);
      for (Eigen::Index j = 1; j < p; ++j)
        for (Eigen::Index i = 0; i < j; ++i)
          if (edge(rng)) a(i, j) = a(j, i) = 0.5;
      const Vector eig = sym_eigen(SymMatrix(a)).values;
      const double shift = detail::match_condition(eig, static_cast<double>(p), p);
      Matrix theta0 = a;
      theta0.diagonal().array() += shift;
      const Vector scale = theta0.diagonal().cwiseSqrt().cwiseInverse();
      Matrix theta = scale.asDiagonal() * theta0 * scale.asDiagonal();
      theta.diagonal().setOnes();
      return detail::from_theta(theta, spec);
    }
    case NetworkModel::WishartLike: {
      constexpr Eigen::Index n0 = 10000;
      std::normal_distribution<double> normal(0.0, 1.0);
      Matrix y(n0, p);
      for (Eigen::Index i = 0; i < n0; ++i)
        for (Eigen::Index j = 0; j < p; ++j) y(i, j) = normal(rng);
      const Matrix theta = (y.transpose() * y) / static_cast<double>(n0);
      return detail::from_theta(theta, spec);
    }
    case NetworkModel::Star: {
      Matrix theta = Matrix::Identity(p, p);
      for (Eigen::Index k = 1; k < p; ++k) theta(0, k) = theta(k, 0) = 0.1;
      return detail::from_theta(theta, spec);
    }
    case NetworkModel::MovingAverage: {
      Matrix sigma = Matrix::Identity(p, p);
      for (Eigen::Index k = 1; k < p; ++k) sigma(k, k - 1) = sigma(k - 1, k) = 0.2;
      for (Eigen::Index k = 2; k < p; ++k) sigma(k, k - 2) = sigma(k - 2, k) = 0.2 * 0.2;
      return detail::from_sigma(sigma, spec);
    }
    case NetworkModel::DiagDominant: {
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      std::uniform_real_distribution<double> u_diag(0.0, 0.1);
      Matrix a = Matrix::Zero(p, p);
      for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
          if (i != j) a(i, j) = u01(rng);
      const Matrix b = 0.5 * (a + a.transpose());
      const double gamma = b.cwiseAbs().rowwise().sum().maxCoeff();
      Matrix sigma = b / gamma;
      for (Eigen::Index k = 0; k < p; ++k) sigma(k, k) = 1.0 + u_diag(rng);
      return detail::from_sigma(sigma, spec);
    }
  }
  fail(ErrorKind::InvalidInput, "make_network: unknown model");
}

/// n i.i.d. rows from N(0, Sigma) via the Cholesky factor of Sigma.
inline Matrix sample_mvn(const GroundTruth& truth, Eigen::Index n, std::uint64_t seed) {
  require(n >= 2, ErrorKind::InvalidInput, "sample_mvn: n must be >= 2");
  Eigen::LLT<Matrix> llt(truth.sigma.mat());
  require(llt.info() == Eigen::Success, ErrorKind::NotPositiveDefinite,
          "sample_mvn: covariance is not positive definite");
  const Eigen::Index p = truth.sigma.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) z(i, j) = normal(rng);
  return z * llt.matrixU();  // rows z L^T
}

/// X'X / n. No centering: simulated data are zero mean.
inline SymMatrix sample_cov(const Matrix& x) {
  require(x.rows() >= 1 && x.cols() >= 1, ErrorKind::InvalidInput, "sample_cov: empty data");
  return SymMatrix(Matrix(x.transpose() * x / static_cast<double>(x.rows())));
}

inline Matrix center_columns(const Matrix& x) {
  return x.rowwise() - x.colwise().mean();
}

}  // namespace gridge
