#pragma once

#include "priorkrylov/core/dense.hpp"

namespace priorkrylov {

/// Coefficients C (D x D_min, orthonormal columns) of the recycled basis
/// V C: the leading D_min - 1 right singular vectors of the stacked factor H
/// followed by the part of u they miss. If u is already captured, the next
/// singular direction pads the basis instead.
inline Matrix compress_coefficients(const Matrix& H, const Vector& u, Index d_min) {
  const Index d = H.cols();
  if (d_min < 1 || d_min - 1 > d) throw std::invalid_argument("compress: D_min out of range");
  Eigen::JacobiSVD<Matrix> svd(H, Eigen::ComputeFullV);
  const Matrix& Wf = svd.matrixV();
  const Index k = d_min - 1;
  Matrix C = Wf.leftCols(k);
  Vector t = u;
  project_out(C, t, 2);
  const double scale = std::max(u.norm(), std::numeric_limits<double>::min());
  Matrix out;
  if (t.norm() >= 1e-13 * scale) {
    out.resize(d, k + 1);
    out << C, t / t.norm();
  } else if (k < d) {
    out.resize(d, k + 1);
    out << C, Wf.col(k);
  } else {
    out = C;
  }
  return out;
}

/// Compressed basis V_tilde = V C for H = [R; sqrt(mu) I].
inline Matrix compress_basis_tsvd(const Matrix& V, const Matrix& R, double mu, const Vector& z_current,
                                  Index d_min) {
  const Index d = V.cols();
  Matrix H(R.rows() + d, d);
  H << R, std::sqrt(mu) * Matrix::Identity(d, d);
  const Vector u = V.transpose() * z_current;
  return V * compress_coefficients(H, u, d_min);
}

/// Expected basis dimension at iteration ell for a capped method whose
/// basis starts at dimension d0 and grows by one per iteration. Once the
/// cap is hit the size cycles through 1..D_max (restart) or D_min..D_max
/// (recycle).
inline Index expected_basis_dim(bool recycle, int ell, Index d0, Index d_min, Index d_max) {
  const Index first_cap = d_max - d0;  // iteration at which D_max is first used
  if (ell <= first_cap) return d0 + ell;
  const Index low = recycle ? d_min : 1;
  const Index period = d_max - low + 1;
  return low + (ell - first_cap - 1) % period;
}

}  // namespace priorkrylov
