#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "gridge/error.hpp"

namespace gridge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric p x p matrix. Symmetry is enforced by storage: every
/// construction path averages the input with its transpose, so
/// (i, j) and (j, i) are bitwise equal.
class SymMatrix {
 public:
  SymMatrix() : m_(Matrix::Identity(1, 1)) {}

  explicit SymMatrix(const Matrix& m) : m_(m) {
    require(m.rows() == m.cols(), ErrorKind::InvalidInput,
            "SymMatrix requires a square matrix, got " + std::to_string(m.rows()) + "x" +
                std::to_string(m.cols()));
    require(m.rows() >= 1, ErrorKind::InvalidInput, "SymMatrix requires dim >= 1");
    symmetrize();
  }

  /// Rejects inputs whose asymmetry exceeds `tol` (max-abs) instead of
  /// silently averaging.
  static SymMatrix checked(const Matrix& m, double tol = 1e-8) {
    require(m.rows() == m.cols(), ErrorKind::InvalidInput, "matrix is not square");
    require(m.rows() >= 1, ErrorKind::InvalidInput, "matrix is empty");
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    require(asym <= tol, ErrorKind::InvalidInput,
            "matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
    return SymMatrix(m);
  }

  static SymMatrix identity(Eigen::Index p) { return SymMatrix(Matrix::Identity(p, p)); }
  static SymMatrix zero(Eigen::Index p) { return SymMatrix(Matrix::Zero(p, p)); }
  static SymMatrix diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }
  static SymMatrix scalar(Eigen::Index p, double v) {
    return SymMatrix(Matrix(Matrix::Identity(p, p) * v));
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  double trace() const { return m_.trace(); }
  bool is_finite() const { return m_.allFinite(); }
  bool is_diagonal() const {
    for (Eigen::Index j = 0; j < dim(); ++j)
      for (Eigen::Index i = 0; i < dim(); ++i)
        if (i != j && m_(i, j) != 0.0) return false;
    return true;
  }

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    return SymMatrix(Matrix(a.m_ + b.m_));
  }
  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
    return SymMatrix(Matrix(a.m_ - b.m_));
  }
  friend SymMatrix operator*(double c, const SymMatrix& a) { return SymMatrix(Matrix(c * a.m_)); }
  friend SymMatrix operator*(const SymMatrix& a, double c) { return c * a; }

 private:
  void symmetrize() { m_ = 0.5 * (m_ + m_.transpose()).eval(); }

  Matrix m_;
};

struct EigenDecomp {
  Vector values;   // non-increasing
  Matrix vectors;  // orthogonal, columns are eigenvectors
};

/// Symmetric eigendecomposition with eigenvalues sorted non-increasing.
inline EigenDecomp sym_eigen(const SymMatrix& m) {
  require(m.is_finite(), ErrorKind::InvalidInput, "sym_eigen: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.mat());
  require(solver.info() == Eigen::Success, ErrorKind::NumericalFailure,
          "sym_eigen: eigensolver did not converge");
  // Eigen returns ascending order.
  EigenDecomp out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

/// V f(D) V^T for a scalar function applied to the spectrum.
inline SymMatrix apply_spectral(const EigenDecomp& e, const std::function<double(double)>& f) {
  Vector mapped = e.values.unaryExpr(f);
  return SymMatrix(Matrix(e.vectors * mapped.asDiagonal() * e.vectors.transpose()));
}

inline constexpr double kPsdClamp = 1e-10;
inline constexpr double kTolPd = 1e-12;

inline double min_eigenvalue(const SymMatrix& m) { return sym_eigen(m).values.minCoeff(); }

inline bool is_positive_definite(const SymMatrix& m, double tol = kTolPd) {
  return m.is_finite() && min_eigenvalue(m) > tol;
}

inline SymMatrix spd_sqrt(const SymMatrix& m) {
  const EigenDecomp e = sym_eigen(m);
  const double lo = e.values.minCoeff();
  require(lo >= -kPsdClamp, ErrorKind::NotPositiveSemiDefinite,
          "spd_sqrt: min eigenvalue " + std::to_string(lo) + " below -1e-10");
  return apply_spectral(e, [](double v) { return std::sqrt(std::max(v, 0.0)); });
}

inline SymMatrix spd_inverse(const SymMatrix& m) {
  const EigenDecomp e = sym_eigen(m);
  const double lo = e.values.minCoeff();
  require(lo > kTolPd, ErrorKind::SingularMatrix,
          "spd_inverse: min eigenvalue " + std::to_string(lo) + " <= 1e-12");
  return apply_spectral(e, [](double v) { return 1.0 / v; });
}

/// log det of a positive definite matrix.
inline double logdet(const SymMatrix& m) {
  const EigenDecomp e = sym_eigen(m);
  require(e.values.minCoeff() > 0.0, ErrorKind::NotPositiveDefinite,
          "logdet: matrix is not positive definite");
  return e.values.array().log().sum();
}

inline double frobenius_norm(const SymMatrix& m) { return m.mat().norm(); }

inline double spectral_norm(const SymMatrix& m) {
  return sym_eigen(m).values.cwiseAbs().maxCoeff();
}

inline double max_abs_offdiag(const SymMatrix& m) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < m.dim(); ++j)
    for (Eigen::Index i = 0; i < m.dim(); ++i)
      if (i != j) best = std::max(best, std::abs(m(i, j)));
  return best;
}

/// Sum of absolute values of all entries, diagonal included.
inline double l1_norm(const SymMatrix& m) { return m.mat().cwiseAbs().sum(); }

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Symmetric product a*b*a, useful for similarity transforms.
inline SymMatrix sandwich(const Matrix& a, const SymMatrix& b) {
  return SymMatrix(Matrix(a * b.mat() * a.transpose()));
}

}  // namespace gridge
