#pragma once

#include <memory>

#include "priorkrylov/core/linear_operator.hpp"
#include "priorkrylov/priorcond/pinv.hpp"

namespace priorkrylov {

/// Factors of A K, the image of the kernel basis, shared by every oblique
/// pseudoinverse built for the same problem.
struct KernelCache {
  Matrix K;   // N x P
  Matrix Q;   // M x P
  Matrix R;   // P x P
  Index dim() const { return K.cols(); }
};

struct KernelSplit {
  Vector x_ker;
  Vector b_bar;
  std::shared_ptr<const KernelCache> cache;
};

/// x_ker = K (A K)^dagger b and the data remainder b_bar = b - A x_ker.
inline KernelSplit x_kernel(const LinearOperator& A, const Matrix& K, const Vector& b) {
  auto cache = std::make_shared<KernelCache>();
  cache->K = K;
  KernelSplit out;
  if (K.cols() == 0) {
    cache->Q = Matrix(A.rows(), 0);
    cache->R = Matrix(0, 0);
    out.x_ker = Vector::Zero(A.cols());
    out.b_bar = b;
    out.cache = cache;
    return out;
  }
  const Matrix AK = A.apply_block(K);
  QrFactors f;
  try {
    f = economic_qr(AK);
  } catch (const RankDeficient&) {
    throw SingularKernelImage("x_kernel: A K is rank deficient");
  }
  cache->Q = f.Q;
  cache->R = f.R;
  const Vector qb = f.Q.transpose() * b;
  out.x_ker = K * f.R.triangularView<Eigen::Upper>().solve(qb);
  out.b_bar = b - f.Q * qb;
  out.cache = cache;
  return out;
}

/// (Psi_l)_A^dagger = E Psi_l^dagger with E = I - K (A K)^dagger A.
class ObliquePinv {
 public:
  ObliquePinv(std::shared_ptr<const WeightedPinv> pinv, LinearOperator A,
              std::shared_ptr<const KernelCache> cache,
              std::shared_ptr<MatvecCounter> pinv_counter = std::make_shared<MatvecCounter>())
      : pinv_(std::move(pinv)), A_(std::move(A)), cache_(std::move(cache)), count_(std::move(pinv_counter)) {}

  Index rows() const { return pinv_->rows(); }
  Index cols() const { return pinv_->cols(); }
  const WeightedPinv& pinv() const { return *pinv_; }
  const KernelCache& kernel() const { return *cache_; }
  const LinearOperator& A() const { return A_; }

  /// Psi_l^dagger, counted.
  Matrix pinv_apply(const Matrix& z) const {
    count_->value += static_cast<std::size_t>(z.cols());
    return pinv_->apply(z);
  }
  /// (Psi_l^dagger)^T, counted.
  Matrix pinv_transpose(const Matrix& v) const {
    count_->value += static_cast<std::size_t>(v.cols());
    return pinv_->transpose(v);
  }

  /// E x, using one A product per column when the kernel is nontrivial.
  Matrix project(const Matrix& x) const {
    if (cache_->dim() == 0) return x;
    const Matrix ax = A_.apply_block(x);
    return x - cache_->K * cache_->R.triangularView<Eigen::Upper>().solve(cache_->Q.transpose() * ax);
  }
  /// E^T v.
  Matrix project_transpose(const Matrix& v) const {
    if (cache_->dim() == 0) return v;
    const Matrix t = cache_->R.transpose().triangularView<Eigen::Lower>().solve(cache_->K.transpose() * v);
    return v - A_.adjoint_block(cache_->Q * t);
  }

  Matrix apply(const Matrix& z) const { return project(pinv_apply(z)); }
  Matrix adjoint(const Matrix& v) const { return pinv_transpose(project_transpose(v)); }

  LinearOperator as_operator() const {
    auto self = std::make_shared<const ObliquePinv>(*this);
    return LinearOperator(
        rows(), cols(), [self](const Matrix& z) { return self->apply(z); },
        [self](const Matrix& v) { return self->adjoint(v); });
  }

 private:
  std::shared_ptr<const WeightedPinv> pinv_;
  LinearOperator A_;
  std::shared_ptr<const KernelCache> cache_;
  std::shared_ptr<MatvecCounter> count_;
};

inline ObliquePinv oblique_pinv(const SparsifyingTransform& psi, const Vector& w,
                                const PinvStrategy& strategy, const LinearOperator& A,
                                std::shared_ptr<const KernelCache> cache,
                                std::shared_ptr<MatvecCounter> pinv_counter = std::make_shared<MatvecCounter>(),
                                std::shared_ptr<const DctPreconditioner> precond = nullptr) {
  auto pinv = std::make_shared<const WeightedPinv>(psi, w, strategy, std::move(precond));
  return ObliquePinv(std::move(pinv), A, std::move(cache), std::move(pinv_counter));
}

/// The priorconditioned operator A_bar = A (Psi_l)_A^dagger. Since
/// A E = (I - Q Q^T) A with A K = Q R, each application costs one product
/// with A and one with the pseudoinverse.
class Abar {
 public:
  explicit Abar(ObliquePinv obliq) : obliq_(std::move(obliq)) {}

  Index rows() const { return obliq_.A().rows(); }
  Index cols() const { return obliq_.cols(); }
  const ObliquePinv& oblique() const { return obliq_; }

  Matrix apply(const Matrix& z) const {
    Matrix y = obliq_.A().apply_block(obliq_.pinv_apply(z));
    return deflate(y);
  }
  Matrix adjoint(const Matrix& u) const {
    return obliq_.pinv_transpose(obliq_.A().adjoint_block(deflate(u)));
  }

  LinearOperator as_operator() const {
    auto self = std::make_shared<const Abar>(*this);
    return LinearOperator(
        rows(), cols(), [self](const Matrix& z) { return self->apply(z); },
        [self](const Matrix& u) { return self->adjoint(u); });
  }

 private:
  Matrix deflate(const Matrix& y) const {
    const KernelCache& c = obliq_.kernel();
    if (c.dim() == 0) return y;
    return y - c.Q * (c.Q.transpose() * y);
  }

  ObliquePinv obliq_;
};

inline Abar abar(const ObliquePinv& obliq) { return Abar(obliq); }

}  // namespace priorkrylov
