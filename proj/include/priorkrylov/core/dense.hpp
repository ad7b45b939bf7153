#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "priorkrylov/core/types.hpp"

namespace priorkrylov {

struct QrFactors {
  Matrix Q;
  Matrix R;
};

namespace detail {

// Flip signs so that the diagonal of R is nonnegative.
inline void normalize_qr_signs(QrFactors& f) {
  const Index k = std::min(f.R.rows(), f.R.cols());
  for (Index i = 0; i < k; ++i) {
    if (f.R(i, i) < 0.0) {
      f.R.row(i) *= -1.0;
      f.Q.col(i) *= -1.0;
    }
  }
}

}  // namespace detail

/// Householder QR of a matrix of any shape: Q is m×k, R is k×n with
/// k = min(m, n). No rank check is made.
inline QrFactors thin_qr(const Matrix& M) {
  const Index m = M.rows();
  const Index n = M.cols();
  const Index k = std::min(m, n);
  QrFactors f;
  if (k == 0) {
    f.Q = Matrix(m, 0);
    f.R = Matrix(0, n);
    return f;
  }
  Eigen::HouseholderQR<Matrix> qr(M);
  f.Q = qr.householderQ() * Matrix::Identity(m, k);
  f.R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  detail::normalize_qr_signs(f);
  return f;
}

/// Economic QR of a tall matrix with linearly independent columns.
inline QrFactors economic_qr(const Matrix& M) {
  if (M.rows() < M.cols()) {
    throw std::invalid_argument("economic_qr: requires rows >= cols");
  }
  QrFactors f = thin_qr(M);
  const double scale = M.norm();
  for (Index i = 0; i < f.R.cols(); ++i) {
    if (std::abs(f.R(i, i)) < 1e-12 * scale || scale == 0.0) {
      throw RankDeficient("economic_qr: pivot below tolerance");
    }
  }
  return f;
}

/// Projects r onto the orthogonal complement of col(V) using classical
/// Gram-Schmidt with the given number of passes. Returns the coefficients.
inline Vector project_out(const Matrix& V, Vector& r, int passes = 2) {
  Vector coeff = Vector::Zero(V.cols());
  if (V.cols() == 0) return coeff;
  for (int p = 0; p < passes; ++p) {
    const Vector c = V.transpose() * r;
    r.noalias() -= V * c;
    coeff += c;
  }
  return coeff;
}

/// Appends a column to an economic QR factorization in O(mn).
inline QrFactors qr_append_column(const Matrix& Q, const Matrix& R, const Vector& new_col) {
  if (new_col.size() != Q.rows()) {
    throw std::invalid_argument("qr_append_column: length mismatch");
  }
  const Index n = R.cols();
  Vector c = new_col;
  const double before = c.norm();
  const Vector r = project_out(Q, c, 2);
  const double rho = c.norm();
  if (before == 0.0 || rho < 1e-12 * before) {
    throw RankDeficient("qr_append_column: column lies in col(Q)");
  }
  QrFactors f;
  f.Q.resize(Q.rows(), Q.cols() + 1);
  f.Q << Q, c / rho;
  f.R = Matrix::Zero(n + 1, n + 1);
  f.R.topLeftCorner(R.rows(), n) = R;
  f.R.col(n).head(r.size()) = r;
  f.R(n, n) = rho;
  return f;
}

struct SvdFactors {
  Matrix U;
  Vector s;
  Matrix W;
};

/// Thin SVD with singular values in descending order.
inline SvdFactors thin_svd(const Matrix& M) {
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

/// Leading k singular triplets.
inline SvdFactors truncated_svd(const Matrix& M, Index k) {
  if (k < 1 || k > std::min(M.rows(), M.cols())) {
    throw std::invalid_argument("truncated_svd: k out of range");
  }
  SvdFactors full = thin_svd(M);
  return {full.U.leftCols(k), full.s.head(k), full.W.leftCols(k)};
}

/// Eigenvalues of a symmetric matrix, descending.
inline Vector sym_eigvals(const Matrix& M) {
  const Matrix S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

/// Numerical rank from singular values.
inline Index numerical_rank(const Vector& s, Index rows, Index cols) {
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double tol = static_cast<double>(std::max(rows, cols)) *
                     std::numeric_limits<double>::epsilon() * s(0);
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) ++r;
  }
  return r;
}

/// Orthonormal basis of span{seed, op(seed), ..., op^{h-1}(seed)} built by a
/// Lanczos-type recurrence with full reorthogonalization. Stops early when
/// the new direction falls below 1e-12 of its pre-orthogonalization norm.
inline Matrix krylov_basis(const std::function<Vector(const Vector&)>& op, const Vector& seed,
                           Index h) {
  if (h < 1) throw std::invalid_argument("krylov_basis: h must be positive");
  const double nrm = seed.norm();
  if (!(nrm >= 1e-14)) throw ZeroSeed("krylov_basis: zero seed");
  Matrix V(seed.size(), h);
  V.col(0) = seed / nrm;
  Index dim = 1;
  while (dim < h) {
    Vector w = op(V.col(dim - 1));
    const double before = w.norm();
    project_out(V.leftCols(dim), w, 2);
    const double after = w.norm();
    if (before == 0.0 || after < 1e-12 * before) break;
    V.col(dim) = w / after;
    ++dim;
  }
  return V.leftCols(dim);
}

}  // namespace priorkrylov
