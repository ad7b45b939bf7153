#pragma once

#include <functional>
#include <memory>
#include <utility>

#include "priorkrylov/core/types.hpp"

namespace priorkrylov {

/// Tally of operator applications. Each solver run owns its own instance.
struct MatvecCounter {
  std::size_t value = 0;
};

/// Matrix-free linear map R^cols -> R^rows.
///
/// Block applications count one matvec per column so that the tally does not
/// depend on whether a caller batches its products.
class LinearOperator {
 public:
  using BlockFn = std::function<Matrix(const Matrix&)>;

  LinearOperator() = default;
  LinearOperator(Index rows, Index cols, BlockFn apply, BlockFn adjoint)
      : rows_(rows),
        cols_(cols),
        apply_(std::move(apply)),
        adjoint_(std::move(adjoint)),
        counter_(std::make_shared<MatvecCounter>()) {}

  static LinearOperator from_dense(Matrix m) {
    auto shared = std::make_shared<const Matrix>(std::move(m));
    return LinearOperator(
        shared->rows(), shared->cols(),
        [shared](const Matrix& x) -> Matrix { return (*shared) * x; },
        [shared](const Matrix& y) -> Matrix { return shared->transpose() * y; });
  }

  static LinearOperator from_sparse(SparseMatrix m) {
    auto shared = std::make_shared<const SparseMatrix>(std::move(m));
    return LinearOperator(
        shared->rows(), shared->cols(),
        [shared](const Matrix& x) -> Matrix { return (*shared) * x; },
        [shared](const Matrix& y) -> Matrix { return shared->transpose() * y; });
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  Vector apply(const Vector& x) const {
    counter_->value += 1;
    return apply_(x);
  }
  Vector adjoint(const Vector& y) const {
    counter_->value += 1;
    return adjoint_(y);
  }
  Matrix apply_block(const Matrix& x) const {
    counter_->value += static_cast<std::size_t>(x.cols());
    return apply_(x);
  }
  Matrix adjoint_block(const Matrix& y) const {
    counter_->value += static_cast<std::size_t>(y.cols());
    return adjoint_(y);
  }

  std::size_t count() const { return counter_->value; }

  /// Copy sharing the same maps but tallying into a fresh counter.
  LinearOperator with_fresh_counter() const {
    LinearOperator copy = *this;
    copy.counter_ = std::make_shared<MatvecCounter>();
    return copy;
  }

  /// Copy tallying into the given counter.
  LinearOperator with_counter(std::shared_ptr<MatvecCounter> counter) const {
    LinearOperator copy = *this;
    copy.counter_ = std::move(counter);
    return copy;
  }

  /// Dense materialization by applying the operator to the identity.
  Matrix to_dense() const { return apply_(Matrix::Identity(cols_, cols_)); }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  BlockFn apply_;
  BlockFn adjoint_;
  std::shared_ptr<MatvecCounter> counter_ = std::make_shared<MatvecCounter>();
};

}  // namespace priorkrylov
