#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "priorkrylov/core/dense.hpp"
#include "priorkrylov/core/linear_operator.hpp"

namespace priorkrylov {

enum class TransformTag { dirichlet1d, neumann1d, aniso2d_neumann, custom_dense };

inline std::string to_string(TransformTag t) {
  switch (t) {
    case TransformTag::dirichlet1d: return "dirichlet1d";
    case TransformTag::neumann1d: return "neumann1d";
    case TransformTag::aniso2d_neumann: return "aniso2d_neumann";
    case TransformTag::custom_dense: return "custom_dense";
  }
  return "unknown";
}

/// Sparsifying transform Psi : R^N -> R^K together with an orthonormal basis
/// of its kernel. Square invertible transforms additionally carry their
/// inverse maps.
///
/// Images are stored with the column index varying fastest: pixel (row r,
/// column c) of an Ny-by-Nx image lives at index c + Nx * r.
struct SparsifyingTransform {
  using BlockFn = std::function<Matrix(const Matrix&)>;

  Index rows = 0;
  Index cols = 0;
  TransformTag tag = TransformTag::custom_dense;
  BlockFn forward;
  BlockFn transpose;
  Matrix kernel;  // cols x P
  BlockFn inverse;            // set only when invertible
  BlockFn inverse_transpose;  // set only when invertible
  Index nx = 0;  // grid width for 2D transforms
  Index ny = 0;  // grid height for 2D transforms

  Index kernel_dim() const { return kernel.cols(); }
  Index rank() const { return cols - kernel_dim(); }
  bool invertible() const { return static_cast<bool>(inverse); }

  Vector apply(const Vector& x) const { return forward(x); }
  Vector adjoint(const Vector& y) const { return transpose(y); }
  Matrix apply_block(const Matrix& x) const { return forward(x); }
  Matrix adjoint_block(const Matrix& y) const { return transpose(y); }

  LinearOperator as_operator() const { return LinearOperator(rows, cols, forward, transpose); }

  Matrix dense() const { return forward(Matrix::Identity(cols, cols)); }
};

namespace detail {

// Forward differences x_k - x_{k+1} down each column; the last row is left
// as the caller wants it (x_N for Dirichlet, zero for Neumann).
inline Matrix forward_diff(const Matrix& x, bool dirichlet) {
  const Index n = x.rows();
  Matrix y = x;
  y.topRows(n - 1) -= x.bottomRows(n - 1);
  if (!dirichlet) y.row(n - 1).setZero();
  return y;
}

inline Matrix forward_diff_transpose(const Matrix& y, bool dirichlet) {
  const Index n = y.rows();
  Matrix z = y;
  if (!dirichlet) z.row(n - 1).setZero();
  z.bottomRows(n - 1) -= y.topRows(n - 1);
  return z;
}

}  // namespace detail

/// [Psi x]_k = x_k - x_{k+1} for k < N and [Psi x]_N = x_N.
inline SparsifyingTransform d1_dirichlet(Index n) {
  if (n < 2) throw std::invalid_argument("d1_dirichlet: N >= 2 required");
  SparsifyingTransform t;
  t.rows = n;
  t.cols = n;
  t.tag = TransformTag::dirichlet1d;
  t.forward = [](const Matrix& x) { return detail::forward_diff(x, true); };
  t.transpose = [](const Matrix& y) { return detail::forward_diff_transpose(y, true); };
  t.kernel = Matrix(n, 0);
  t.inverse = [](const Matrix& y) {
    Matrix x = y;
    for (Index k = x.rows() - 2; k >= 0; --k) x.row(k) += x.row(k + 1);
    return x;
  };
  t.inverse_transpose = [](const Matrix& y) {
    Matrix x = y;
    for (Index k = 1; k < x.rows(); ++k) x.row(k) += x.row(k - 1);
    return x;
  };
  return t;
}

/// Forward differences with a zero last row; the kernel is spanned by 1_N.
inline SparsifyingTransform d1_neumann(Index n) {
  if (n < 2) throw std::invalid_argument("d1_neumann: N >= 2 required");
  SparsifyingTransform t;
  t.rows = n;
  t.cols = n;
  t.tag = TransformTag::neumann1d;
  t.forward = [](const Matrix& x) { return detail::forward_diff(x, false); };
  t.transpose = [](const Matrix& y) { return detail::forward_diff_transpose(y, false); };
  t.kernel = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  return t;
}

/// Anisotropic 2D gradient with Neumann boundaries on an Ny-by-Nx grid.
/// The first N outputs hold vertical differences, the last N horizontal ones.
inline SparsifyingTransform d2_aniso_neumann(Index nx, Index ny) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("d2_aniso_neumann: Nx, Ny >= 2 required");
  const Index n = nx * ny;
  SparsifyingTransform t;
  t.rows = 2 * n;
  t.cols = n;
  t.tag = TransformTag::aniso2d_neumann;
  t.nx = nx;
  t.ny = ny;
  t.forward = [nx, ny, n](const Matrix& x) {
    Matrix y(2 * n, x.cols());
    for (Index j = 0; j < x.cols(); ++j) {
      Eigen::Map<const Matrix> img(x.col(j).data(), nx, ny);
      Eigen::Map<Matrix> vert(y.col(j).data(), nx, ny);
      Eigen::Map<Matrix> horz(y.col(j).data() + n, nx, ny);
      vert.leftCols(ny - 1) = img.leftCols(ny - 1) - img.rightCols(ny - 1);
      vert.col(ny - 1).setZero();
      horz.topRows(nx - 1) = img.topRows(nx - 1) - img.bottomRows(nx - 1);
      horz.row(nx - 1).setZero();
    }
    return y;
  };
  t.transpose = [nx, ny, n](const Matrix& y) {
    Matrix x(n, y.cols());
    for (Index j = 0; j < y.cols(); ++j) {
      Eigen::Map<const Matrix> vert(y.col(j).data(), nx, ny);
      Eigen::Map<const Matrix> horz(y.col(j).data() + n, nx, ny);
      Eigen::Map<Matrix> img(x.col(j).data(), nx, ny);
      img.setZero();
      img.leftCols(ny - 1) += vert.leftCols(ny - 1);
      img.rightCols(ny - 1) -= vert.leftCols(ny - 1);
      img.topRows(nx - 1) += horz.topRows(nx - 1);
      img.bottomRows(nx - 1) -= horz.topRows(nx - 1);
    }
    return x;
  };
  t.kernel = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  return t;
}

/// Wraps an explicit matrix; the kernel basis comes from its SVD.
inline SparsifyingTransform custom_dense(const Matrix& psi) {
  auto shared = std::make_shared<const Matrix>(psi);
  SparsifyingTransform t;
  t.rows = psi.rows();
  t.cols = psi.cols();
  t.tag = TransformTag::custom_dense;
  t.forward = [shared](const Matrix& x) -> Matrix { return (*shared) * x; };
  t.transpose = [shared](const Matrix& y) -> Matrix { return shared->transpose() * y; };
  Eigen::JacobiSVD<Matrix> svd(psi, Eigen::ComputeFullV);
  const Index r = numerical_rank(svd.singularValues(), psi.rows(), psi.cols());
  t.kernel = svd.matrixV().rightCols(psi.cols() - r);
  return t;
}

}  // namespace priorkrylov
