#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "priorkrylov/core/dense.hpp"
#include "priorkrylov/core/rng.hpp"
#include "priorkrylov/transforms/dct.hpp"
#include "priorkrylov/transforms/sparsifying.hpp"

namespace priorkrylov {

struct PinvStrategy {
  enum class Kind { Dense, DeltaRegularized, PcgDct };
  Kind kind = Kind::Dense;
  double delta = 1e-10;
  double tol = 1e-8;
  int max_iters = 500;

  static PinvStrategy dense() { return {}; }
  static PinvStrategy delta_regularized(double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("DeltaRegularized: delta must be positive");
    PinvStrategy s;
    s.kind = Kind::DeltaRegularized;
    s.delta = delta;
    return s;
  }
  static PinvStrategy pcg_dct(double tol = 1e-8, int max_iters = 500) {
    if (!(tol > 0.0 && tol < 1.0) || max_iters < 1)
      throw std::invalid_argument("PcgDct: tol in (0,1) and max_iters >= 1 required");
    PinvStrategy s;
    s.kind = Kind::PcgDct;
    s.tol = tol;
    s.max_iters = max_iters;
    return s;
  }
};

/// Spectral preconditioner for Psi^T Psi of the 2D Neumann gradient: the DCT
/// diagonalizes it, and the eigenvalues are read off with one probe vector.
class DctPreconditioner {
 public:
  explicit DctPreconditioner(const SparsifyingTransform& psi, std::uint64_t probe_seed = 0x5eedULL)
      : dct_(psi.nx, psi.ny) {
    if (psi.tag != TransformTag::aniso2d_neumann) {
      throw std::invalid_argument("DctPreconditioner: requires the 2D Neumann gradient");
    }
    CounterRng rng(probe_seed, 0);
    const Vector probe = rng.uniform_vector(dct_.size(), 0.5, 1.5);
    const Vector image = dct_.forward(psi.adjoint_block(psi.apply_block(dct_.inverse(probe))));
    lambda_ = image.cwiseQuotient(probe);
    const double cutoff = 1e-10 * lambda_.cwiseAbs().maxCoeff();
    lambda_pinv_ = lambda_.unaryExpr([cutoff](double l) { return std::abs(l) <= cutoff ? 0.0 : 1.0 / l; });
  }

  const Vector& eigenvalues() const { return lambda_; }
  const Dct2& dct() const { return dct_; }

  Matrix apply(const Matrix& r) const {
    return dct_.inverse(lambda_pinv_.asDiagonal() * dct_.forward(r));
  }

 private:
  Dct2 dct_;
  Vector lambda_;
  Vector lambda_pinv_;
};

namespace detail {

// Psi^T diag(w2) Psi for the 2D Neumann gradient in a single stencil pass.
inline Matrix aniso_weighted_laplacian(Index nx, Index ny, const Vector& w2, const Matrix& x) {
  const Index n = nx * ny;
  Matrix out = Matrix::Zero(n, x.cols());
  const double* wv = w2.data();
  const double* wh = w2.data() + n;
  for (Index j = 0; j < x.cols(); ++j) {
    const double* xi = x.col(j).data();
    double* o = out.col(j).data();
    for (Index r = 0; r < ny; ++r) {
      for (Index c = 0; c < nx; ++c) {
        const Index p = c + nx * r;
        if (r + 1 < ny) {
          const double d = wv[p] * (xi[p] - xi[p + nx]);
          o[p] += d;
          o[p + nx] -= d;
        }
        if (c + 1 < nx) {
          const double d = wh[p] * (xi[p] - xi[p + 1]);
          o[p] += d;
          o[p + 1] -= d;
        }
      }
    }
  }
  return out;
}

}  // namespace detail

/// Solves (Psi^T W^2 Psi) xi = y column by column with DCT-preconditioned CG
/// started from zero. Convergence is judged on the relative preconditioned
/// residual sqrt(r^T M r / r0^T M r0).
inline Matrix pcg_dct_solve(const SparsifyingTransform& psi, const Vector& w, const Matrix& y,
                            double tol, int max_iters, const DctPreconditioner& precond,
                            int* iterations = nullptr) {
  const Vector w2 = w.cwiseAbs2();
  auto normal_op = [&](const Matrix& x) { return detail::aniso_weighted_laplacian(psi.nx, psi.ny, w2, x); };

  Matrix result = Matrix::Zero(y.rows(), y.cols());
  std::vector<Index> active;
  for (Index j = 0; j < y.cols(); ++j) {
    if (y.col(j).squaredNorm() > 0.0) active.push_back(j);
  }
  int iters = 0;
  if (!active.empty()) {
    auto gather = [&](const Matrix& src) {
      Matrix out(src.rows(), static_cast<Index>(active.size()));
      for (std::size_t k = 0; k < active.size(); ++k) out.col(static_cast<Index>(k)) = src.col(active[k]);
      return out;
    };
    Matrix X = Matrix::Zero(y.rows(), static_cast<Index>(active.size()));
    Matrix R = gather(y);
    Matrix Z = precond.apply(R);
    Matrix P = Z;
    Vector rz = (R.cwiseProduct(Z)).colwise().sum().transpose();
    Vector rz0 = rz;
    double worst = 1.0;
    while (!active.empty()) {
      // Retire converged columns.
      std::vector<Index> keep;
      worst = 0.0;
      for (Index k = 0; k < static_cast<Index>(active.size()); ++k) {
        const double rel = rz0(k) > 0.0 ? std::sqrt(std::max(rz(k), 0.0) / rz0(k)) : 0.0;
        if (rel <= tol) {
          result.col(active[static_cast<std::size_t>(k)]) = X.col(k);
        } else {
          keep.push_back(k);
          worst = std::max(worst, rel);
        }
      }
      if (keep.size() != active.size()) {
        const Index m = static_cast<Index>(keep.size());
        Matrix X2(X.rows(), m), R2(R.rows(), m), P2(P.rows(), m);
        Vector rz2(m), rz02(m);
        std::vector<Index> active2;
        for (Index k = 0; k < m; ++k) {
          const Index src = keep[static_cast<std::size_t>(k)];
          X2.col(k) = X.col(src);
          R2.col(k) = R.col(src);
          P2.col(k) = P.col(src);
          rz2(k) = rz(src);
          rz02(k) = rz0(src);
          active2.push_back(active[static_cast<std::size_t>(src)]);
        }
        X = std::move(X2);
        R = std::move(R2);
        P = std::move(P2);
        rz = rz2;
        rz0 = rz02;
        active = std::move(active2);
      }
      if (active.empty()) break;
      if (iters >= max_iters) {
        throw CgNoConvergence("pcg_dct_solve: iteration budget exhausted", worst);
      }
      const Matrix Q = normal_op(P);
      const Vector pq = (P.cwiseProduct(Q)).colwise().sum().transpose();
      const Vector alpha = rz.cwiseQuotient(pq);
      X += P * alpha.asDiagonal();
      R -= Q * alpha.asDiagonal();
      Z = precond.apply(R);
      const Vector rz_new = (R.cwiseProduct(Z)).colwise().sum().transpose();
      const Vector beta = rz_new.cwiseQuotient(rz);
      P = Z + P * beta.asDiagonal();
      rz = rz_new;
      ++iters;
    }
  }
  if (iterations != nullptr) *iterations = iters;
  return result;
}

/// Action of (diag(w) Psi)^dagger and its transpose under a chosen strategy.
class WeightedPinv {
 public:
  WeightedPinv(const SparsifyingTransform& psi, const Vector& w, const PinvStrategy& strategy,
               std::shared_ptr<const DctPreconditioner> precond = nullptr)
      : psi_(psi), w_(w), strategy_(strategy), precond_(std::move(precond)) {
    if (w.size() != psi.rows) throw std::invalid_argument("WeightedPinv: weight length mismatch");
    if (!(w.minCoeff() > 0.0)) throw std::invalid_argument("WeightedPinv: weights must be positive");
    switch (strategy_.kind) {
      case PinvStrategy::Kind::Dense:
        if (!psi.invertible()) {
          const Matrix c = w.asDiagonal() * psi.dense();
          Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
          const Vector& s = svd.singularValues();
          const Index r = numerical_rank(s, c.rows(), c.cols());
          dense_ = svd.matrixV().leftCols(r) * s.head(r).cwiseInverse().asDiagonal() *
                   svd.matrixU().leftCols(r).transpose();
        }
        break;
      case PinvStrategy::Kind::DeltaRegularized: {
        const Matrix c = w.asDiagonal() * psi.dense();
        Matrix g = c.transpose() * c;
        g.diagonal().array() += strategy_.delta;
        llt_.compute(g);
        break;
      }
      case PinvStrategy::Kind::PcgDct:
        if (!precond_) precond_ = std::make_shared<const DctPreconditioner>(psi);
        break;
    }
  }

  Index rows() const { return psi_.cols; }
  Index cols() const { return psi_.rows; }

  /// Psi_l^dagger y for each column y.
  Matrix apply(const Matrix& y) const {
    switch (strategy_.kind) {
      case PinvStrategy::Kind::Dense:
        if (psi_.invertible()) return psi_.inverse(w_.cwiseInverse().asDiagonal() * y);
        return dense_ * y;
      case PinvStrategy::Kind::DeltaRegularized:
        return llt_.solve(psi_.adjoint_block(w_.asDiagonal() * y));
      case PinvStrategy::Kind::PcgDct:
        return pcg(psi_.adjoint_block(w_.asDiagonal() * y));
    }
    return {};
  }

  /// (Psi_l^dagger)^T v for each column v.
  Matrix transpose(const Matrix& v) const {
    switch (strategy_.kind) {
      case PinvStrategy::Kind::Dense:
        if (psi_.invertible()) return w_.cwiseInverse().asDiagonal() * psi_.inverse_transpose(v);
        return dense_.transpose() * v;
      case PinvStrategy::Kind::DeltaRegularized:
        return w_.asDiagonal() * psi_.apply_block(llt_.solve(v));
      case PinvStrategy::Kind::PcgDct: {
        // The normal matrix is singular on ker(Psi); its pseudoinverse only
        // sees the component of v orthogonal to that kernel.
        Matrix vp = v - psi_.kernel * (psi_.kernel.transpose() * v);
        return w_.asDiagonal() * psi_.apply_block(pcg(vp));
      }
    }
    return {};
  }

  /// Dense materialization, for analysis and tests.
  Matrix dense() const { return apply(Matrix::Identity(cols(), cols())); }

 private:
  Matrix pcg(const Matrix& rhs) const {
    Matrix xi = pcg_dct_solve(psi_, w_, rhs, strategy_.tol, strategy_.max_iters, *precond_);
    // Guard the iterate against roundoff drift into the kernel.
    return xi - psi_.kernel * (psi_.kernel.transpose() * xi);
  }

  SparsifyingTransform psi_;
  Vector w_;
  PinvStrategy strategy_;
  std::shared_ptr<const DctPreconditioner> precond_;
  Matrix dense_;
  Eigen::LLT<Matrix> llt_;
};

/// Psi_l^dagger y with Psi_l = diag(w) Psi.
inline Vector weighted_pinv_apply(const SparsifyingTransform& psi, const Vector& w, const Vector& y,
                                  const PinvStrategy& strategy) {
  return WeightedPinv(psi, w, strategy).apply(y);
}

}  // namespace priorkrylov
