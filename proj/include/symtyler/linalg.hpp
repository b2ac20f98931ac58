#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "symtyler/error.hpp"

namespace symtyler {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Default tolerances. All are absolute Frobenius-norm thresholds unless noted.
namespace tolerance {
inline constexpr double unitary = 1e-10;
inline constexpr double group = 1e-8;
inline constexpr double structure = 1e-8;
inline constexpr double rank = 1e-9;  // relative to the largest singular value
inline constexpr double eigen_clamp = 1e-14;
}  // namespace tolerance

inline void require_square(const CMatrix& m, const char* name) {
  require(m.rows() == m.cols(), ErrorKind::DimMismatch,
          std::string(name) + " must be square, got " + std::to_string(m.rows()) + "x" +
              std::to_string(m.cols()));
}

inline void require_same_dim(const CMatrix& a, const CMatrix& b, const char* what) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::DimMismatch,
          std::string(what) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
              " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

inline CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) * 0.5; }

inline bool is_hermitian(const CMatrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.adjoint()).norm() <= tol;
}

inline double real_trace(const CMatrix& m) { return m.trace().real(); }

/// Eigen-decomposition of the Hermitian part of `m`; eigenvalues ascending.
struct HermitianEigen {
  RVector values;
  CMatrix vectors;

  explicit HermitianEigen(const CMatrix& m) {
    require_square(m, "Hermitian eigendecomposition input");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m));
    require(solver.info() == Eigen::Success, ErrorKind::NumericalBreakdown,
            "Hermitian eigensolver failed");
    values = solver.eigenvalues();
    vectors = solver.eigenvectors();
  }

  double min() const { return values(0); }
  double max() const { return values(values.size() - 1); }

  template <typename F>
  CMatrix apply(F&& f) const {
    RVector mapped = values.unaryExpr(std::forward<F>(f));
    return hermitian_part(vectors * mapped.asDiagonal() * vectors.adjoint());
  }
};

inline void require_positive_definite(const HermitianEigen& eig, const char* name) {
  require(eig.values.size() > 0 && eig.min() > 0.0, ErrorKind::NotPositiveDefinite,
          std::string(name) + " has minimum eigenvalue " +
              (eig.values.size() > 0 ? std::to_string(eig.min()) : std::string("n/a")));
}

/// M^t for positive-definite M. Eigenvalues below the clamp are raised to it so
/// tiny negative round-off never turns into NaN; nonpositive spectra are rejected.
inline CMatrix pd_power(const CMatrix& m, double t) {
  HermitianEigen eig(m);
  require_positive_definite(eig, "matrix");
  return eig.apply([t](double v) { return std::pow(std::max(v, tolerance::eigen_clamp), t); });
}

inline CMatrix pd_inverse(const CMatrix& m) {
  HermitianEigen eig(m);
  require_positive_definite(eig, "matrix");
  return eig.apply([](double v) { return 1.0 / v; });
}

inline double pd_log_det(const CMatrix& m) {
  Eigen::LLT<CMatrix> llt(hermitian_part(m));
  require(llt.info() == Eigen::Success, ErrorKind::NotPositiveDefinite,
          "Cholesky factorization failed");
  const CMatrix& l = llt.matrixLLT();
  double acc = 0.0;
  for (Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i).real());
  return 2.0 * acc;
}

inline CMatrix unit_trace(const CMatrix& m) {
  const double tr = real_trace(m);
  require(tr > 0.0 && std::isfinite(tr), ErrorKind::NotPositiveDefinite,
          "cannot normalize a matrix with nonpositive trace");
  return hermitian_part(m) / tr;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Cyclic shift with ones on the superdiagonal and in the bottom-left corner.
inline CMatrix shift_matrix(Index p) {
  CMatrix s = CMatrix::Zero(p, p);
  for (Index i = 0; i < p; ++i) s(i, (i + 1) % p) = 1.0;
  return s;
}

inline CMatrix exchange_matrix(Index p) {
  CMatrix j = CMatrix::Zero(p, p);
  for (Index i = 0; i < p; ++i) j(i, p - 1 - i) = 1.0;
  return j;
}

/// Unitary DFT matrix, entry (k, l) = exp(2*pi*i*k*l/p)/sqrt(p). Column 0 is the
/// normalized all-ones vector and every column is an eigenvector of shift_matrix.
inline CMatrix fft_matrix(Index p) {
  CMatrix q(p, p);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  for (Index k = 0; k < p; ++k)
    for (Index l = 0; l < p; ++l) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((k * l) % p) /
                           static_cast<double>(p);
      q(k, l) = std::polar(scale, angle);
    }
  return q;
}

}  // namespace symtyler
