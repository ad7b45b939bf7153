#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "priorkrylov/core/dense.hpp"
#include "priorkrylov/priorcond/oblique.hpp"

namespace priorkrylov {

struct BoundEntry {
  Index i = 0;  // 1-based
  double lambda = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct BoundReport {
  std::string which;
  std::vector<BoundEntry> entries;
  bool pass = true;
  double c1 = 0.0;
  double c2 = 0.0;
  Index R = 0;
  double scale = 0.0;
  double slack = 1e-8;
  Index violations = 0;

  void finalize() {
    violations = 0;
    const double tol = slack * scale;
    for (const BoundEntry& e : entries) {
      if (e.lambda < e.lower - tol || e.lambda > e.upper + tol) ++violations;
    }
    pass = violations == 0;
  }
};

/// A^T A + mu Psi^T W^2 Psi.
inline Matrix assemble_q_st(const Matrix& A, const SparsifyingTransform& psi, const Vector& w, double mu) {
  const Matrix P = psi.dense();
  Matrix Q = A.transpose() * A + mu * P.transpose() * w.cwiseAbs2().asDiagonal() * P;
  return 0.5 * (Q + Q.transpose());
}

/// Dense A_bar = A (Psi_l)_A^dagger with the exact pseudoinverse.
inline Matrix dense_abar(const Matrix& A, const SparsifyingTransform& psi, const Vector& w) {
  const LinearOperator op = LinearOperator::from_dense(A);
  const KernelSplit split = x_kernel(op, psi.kernel, Vector::Zero(A.rows()));
  const ObliquePinv obliq = oblique_pinv(psi, w, PinvStrategy::dense(), op, split.cache);
  return abar(obliq).apply(Matrix::Identity(psi.rows, psi.rows));
}

/// A_bar^T A_bar + mu I.
inline Matrix assemble_q_pr(const Matrix& A, const SparsifyingTransform& psi, const Vector& w, double mu) {
  const Matrix Ab = dense_abar(A, psi, w);
  Matrix Q = Ab.transpose() * Ab;
  Q.diagonal().array() += mu;
  return 0.5 * (Q + Q.transpose());
}

/// Eigenvalues of A_bar^T A_bar + mu I (descending) as mu + sigma_i^2 from
/// an SVD of A_bar. Unlike eigenvalues of the assembled matrix, the K - R
/// trailing values stay accurate relative to mu when ||Q|| / mu is large.
inline Vector q_pr_eigvals(const Matrix& A, const SparsifyingTransform& psi, const Vector& w, double mu) {
  const Vector s = thin_svd(dense_abar(A, psi, w)).s;
  Vector lam = Vector::Constant(psi.rows, mu);
  lam.head(s.size()).array() += s.array().square();
  return lam;
}

namespace detail {

inline Vector sorted_desc(Vector v) {
  std::sort(v.data(), v.data() + v.size(), std::greater<double>());
  return v;
}

inline double at(const Vector& v, Index one_based) { return v(one_based - 1); }

}  // namespace detail

enum class Theorem { standard, priorconditioned };

/// Index-by-index evaluation of the eigenvalue enclosures for the standard
/// and the priorconditioned normal matrices.
inline BoundReport verify_theorem_bounds(Theorem which, const Matrix& A, const SparsifyingTransform& psi,
                                         const Vector& w, double mu) {
  BoundReport rep;
  const Index N = A.cols();
  const Index K = psi.rows;
  const Matrix P = psi.dense();
  const Vector lam_ata = sym_eigvals(A.transpose() * A);
  const Vector lam_pp = sym_eigvals(P.transpose() * P);
  const Index R = numerical_rank(thin_svd(P).s, P.rows(), P.cols());
  rep.R = R;
  const Vector w2 = detail::sorted_desc(w.cwiseAbs2());
  const Vector winv2 = detail::sorted_desc(w.cwiseAbs2().cwiseInverse());

  if (which == Theorem::standard) {
    rep.which = "standard";
    const Vector lam = sym_eigvals(assemble_q_st(A, psi, w, mu));
    rep.scale = std::max(std::abs(lam(0)), std::abs(lam(N - 1)));
    for (Index i = 1; i <= N; ++i) {
      BoundEntry e;
      e.i = i;
      e.lambda = detail::at(lam, i);
      const double wi = i <= K ? detail::at(w2, i) : 0.0;
      e.upper = detail::at(lam_ata, 1) + mu * detail::at(lam_pp, 1) * wi;
      e.lower = detail::at(lam_ata, N);
      if (i <= R) e.lower += mu * detail::at(lam_pp, R) * detail::at(w2, i + (K - R));
      rep.entries.push_back(e);
    }
  } else {
    rep.which = "priorconditioned";
    const Vector lam = q_pr_eigvals(A, psi, w, mu);
    rep.scale = std::max(std::abs(lam(0)), std::abs(lam(K - 1)));
    rep.c1 = detail::at(winv2, 1) / detail::at(lam_pp, R);
    rep.c2 = detail::at(lam_ata, 1) / detail::at(lam_pp, R);
    for (Index i = 1; i <= K; ++i) {
      BoundEntry e;
      e.i = i;
      e.lambda = detail::at(lam, i);
      e.lower = mu;
      if (i <= R) {
        const double ata_i = i <= N ? detail::at(lam_ata, i) : 0.0;
        e.upper = mu + std::min(rep.c1 * ata_i, rep.c2 * detail::at(winv2, i));
      } else {
        e.upper = mu;
      }
      rep.entries.push_back(e);
    }
  }
  rep.finalize();
  return rep;
}

/// Rank-deficient rectangular Ostrowski enclosure for X^T C X.
inline BoundReport ostrowski_check(const Matrix& C, const Matrix& X) {
  BoundReport rep;
  rep.which = "ostrowski";
  const Index n = C.rows();
  const Index m = X.cols();
  const Vector lam_c = sym_eigvals(C);
  const Vector lam_xx = sym_eigvals(X.transpose() * X);
  const Vector lam = sym_eigvals(X.transpose() * C * X);
  const Index R = numerical_rank(thin_svd(X).s, X.rows(), X.cols());
  rep.R = R;
  const double cnorm = std::max(std::abs(lam_c(0)), std::abs(lam_c(n - 1)));
  const double xnorm2 = m > 0 ? lam_xx(0) : 0.0;
  rep.scale = m > 0 ? std::max(std::abs(lam(0)), std::abs(lam(m - 1))) : 0.0;
  bool psd = lam_c(n - 1) >= -1e-12 * std::max(cnorm, 1.0);
  for (Index i = 1; i <= m; ++i) {
    BoundEntry e;
    e.i = i;
    e.lambda = detail::at(lam, i);
    if (i <= R) {
      // theta_i lies in [lambda_R(X^T X), lambda_1(X^T X)]; a negative
      // eigenvalue of C takes the opposite end of that interval.
      const double lo_c = detail::at(lam_c, i + (n - R));
      const double hi_c = detail::at(lam_c, i);
      e.lower = lo_c * (lo_c >= 0.0 ? detail::at(lam_xx, R) : detail::at(lam_xx, 1));
      e.upper = hi_c * (hi_c >= 0.0 ? detail::at(lam_xx, 1) : detail::at(lam_xx, R));
      if (psd) e.upper = std::min(e.upper, detail::at(lam_c, 1) * detail::at(lam_xx, i));
    } else {
      // The tail is zero; eigenvalues of X^T C X come sorted, so the zero
      // block sits among them by sign. Compare the sorted tail separately.
      e.lower = 0.0;
      e.upper = 0.0;
    }
    rep.entries.push_back(e);
  }
  // The eigenvalues are sorted descending, so the m - R zeros sit between the
  // positive and negative parts. Re-pair them: bounds for i <= R apply to
  // the nonzero eigenvalues in order, the zero bounds to the rest.
  if (R < m) {
    std::vector<double> vals(lam.data(), lam.data() + m);
    std::vector<Index> idx(static_cast<std::size_t>(m));
    for (Index k = 0; k < m; ++k) idx[static_cast<std::size_t>(k)] = k;
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
      return std::abs(vals[static_cast<std::size_t>(a)]) > std::abs(vals[static_cast<std::size_t>(b)]);
    });
    std::vector<char> is_zero(static_cast<std::size_t>(m), 0);
    for (Index k = R; k < m; ++k) is_zero[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] = 1;
    Index nz = 0;
    std::vector<BoundEntry> entries;
    for (Index k = 0; k < m; ++k) {
      if (is_zero[static_cast<std::size_t>(k)]) continue;
      BoundEntry e = rep.entries[static_cast<std::size_t>(nz)];
      e.lambda = vals[static_cast<std::size_t>(k)];
      entries.push_back(e);
      ++nz;
    }
    for (Index k = 0; k < m; ++k) {
      if (!is_zero[static_cast<std::size_t>(k)]) continue;
      BoundEntry e;
      e.i = R + 1 + static_cast<Index>(entries.size()) - nz;
      e.lambda = vals[static_cast<std::size_t>(k)];
      entries.push_back(e);
    }
    rep.entries = std::move(entries);
  }
  rep.finalize();
  // The zero tail is held to the absolute tolerance 1e-10 ||C|| ||X||^2.
  const double zero_tol = 1e-10 * cnorm * xnorm2;
  for (const BoundEntry& e : rep.entries) {
    if (e.i > R && std::abs(e.lambda) > std::max(zero_tol, rep.slack * rep.scale)) {
      rep.pass = false;
    }
  }
  return rep;
}

/// Number of clusters in a spectrum under single linkage, where a gap larger
/// than ten times the median gap (and above roundoff relative to the
/// spectral radius) separates clusters.
inline Index count_clusters(const Vector& eigenvalues) {
  const Index n = eigenvalues.size();
  if (n <= 1) return n;
  Vector v = detail::sorted_desc(eigenvalues);
  std::vector<double> gaps;
  for (Index i = 0; i + 1 < n; ++i) gaps.push_back(v(i) - v(i + 1));
  std::vector<double> sorted = gaps;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double cut = std::max(10.0 * median, 1e-8 * std::max(std::abs(v(0)), std::abs(v(n - 1))));
  Index clusters = 1;
  for (double g : gaps) {
    if (g > cut && g > 0.0) ++clusters;
  }
  return clusters;
}

/// Iterations unpreconditioned CG needs on Q u = v to reach relative
/// residual tol.
inline int cg_iterations(const Matrix& Q, const Vector& v, double tol, int max_iters = 10000) {
  Vector u = Vector::Zero(v.size());
  Vector r = v;
  Vector p = r;
  double rr = r.squaredNorm();
  const double r0 = std::sqrt(rr);
  if (r0 == 0.0) return 0;
  for (int k = 1; k <= max_iters; ++k) {
    const Vector q = Q * p;
    const double alpha = rr / p.dot(q);
    u += alpha * p;
    r -= alpha * q;
    const double rr_new = r.squaredNorm();
    if (std::sqrt(rr_new) <= tol * r0) return k;
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return max_iters;
}

}  // namespace priorkrylov
