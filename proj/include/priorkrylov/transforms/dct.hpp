#pragma once

#include <cmath>
#include <memory>
#include <algorithm>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "priorkrylov/core/linear_operator.hpp"

namespace priorkrylov {

/// Orthonormal type-II DCT matrix of size L: row k holds basis function k.
inline Matrix dct_matrix(Index L) {
  Matrix C(L, L);
  const double a0 = std::sqrt(1.0 / static_cast<double>(L));
  const double ak = std::sqrt(2.0 / static_cast<double>(L));
  for (Index k = 0; k < L; ++k) {
    for (Index n = 0; n < L; ++n) {
      C(k, n) = (k == 0 ? a0 : ak) *
                std::cos(std::numbers::pi * static_cast<double>((2 * n + 1) * k) /
                         (2.0 * static_cast<double>(L)));
    }
  }
  return C;
}

namespace detail {

// FFTW's planner is not reentrant; execution on new arrays is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};

using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

inline FftwPlan make_r2r_plan(Index ny, Index nx, fftw_r2r_kind kind) {
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  const auto count = static_cast<std::size_t>(nx * ny);
  double* in = fftw_alloc_real(count);
  double* out = fftw_alloc_real(count);
  fftw_plan p = fftw_plan_r2r_2d(static_cast<int>(ny), static_cast<int>(nx), in, out, kind, kind, FFTW_MEASURE);
  fftw_free(in);
  fftw_free(out);
  if (p == nullptr) throw std::runtime_error("fftw: plan creation failed");
  return FftwPlan(p);
}

}  // namespace detail

/// Separable orthonormal 2D DCT-II on Ny-by-Nx images (same layout as
/// d2_aniso_neumann). Coefficient (ky, kx) sits at index kx + Nx * ky.
/// Backed by FFTW's REDFT10/REDFT01 transforms with orthonormal scaling.
class Dct2 {
 public:
  Dct2(Index nx, Index ny) : nx_(nx), ny_(ny) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("Dct2: sizes must be positive");
    fwd_ = std::shared_ptr<fftw_plan_s>(detail::make_r2r_plan(ny, nx, FFTW_REDFT10).release(), detail::FftwPlanDeleter{});
    inv_ = std::shared_ptr<fftw_plan_s>(detail::make_r2r_plan(ny, nx, FFTW_REDFT01).release(), detail::FftwPlanDeleter{});
    // REDFT10 returns 2 * sum; REDFT01 expects X_0 + 2 * sum_{k>0} X_k.
    auto scales = [](Index n, bool forward) {
      Vector s(n);
      const double a0 = std::sqrt(1.0 / static_cast<double>(n));
      const double ak = std::sqrt(2.0 / static_cast<double>(n));
      for (Index k = 0; k < n; ++k) s(k) = forward ? 0.5 * (k == 0 ? a0 : ak) : (k == 0 ? a0 : 0.5 * ak);
      return s;
    };
    fwd_scale_ = outer(scales(nx, true), scales(ny, true));
    inv_scale_ = outer(scales(nx, false), scales(ny, false));
  }

  Index size() const { return nx_ * ny_; }

  Matrix forward(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    Scratch s(size());
    for (Index j = 0; j < x.cols(); ++j) {
      std::copy_n(x.col(j).data(), size(), s.in);
      fftw_execute_r2r(fwd_.get(), s.in, s.out);
      out.col(j) = Eigen::Map<const Vector>(s.out, size()).cwiseProduct(fwd_scale_);
    }
    return out;
  }

  Matrix inverse(const Matrix& y) const {
    Matrix out(y.rows(), y.cols());
    Scratch s(size());
    for (Index j = 0; j < y.cols(); ++j) {
      Eigen::Map<Vector>(s.in, size()) = y.col(j).cwiseProduct(inv_scale_);
      fftw_execute_r2r(inv_.get(), s.in, s.out);
      std::copy_n(s.out, size(), out.col(j).data());
    }
    return out;
  }

  LinearOperator as_operator() const {
    auto self = std::make_shared<const Dct2>(*this);
    return LinearOperator(
        size(), size(), [self](const Matrix& x) { return self->forward(x); },
        [self](const Matrix& y) { return self->inverse(y); });
  }

 private:
  // Entry kx + Nx * ky holds sx(kx) * sy(ky).
  static Vector outer(const Vector& sx, const Vector& sy) {
    Vector s(sx.size() * sy.size());
    for (Index ky = 0; ky < sy.size(); ++ky) s.segment(ky * sx.size(), sx.size()) = sx * sy(ky);
    return s;
  }

  // SIMD-aligned buffers matching the alignment the plans were made with.
  struct Scratch {
    double* in;
    double* out;
    explicit Scratch(Index n)
        : in(fftw_alloc_real(static_cast<std::size_t>(n))), out(fftw_alloc_real(static_cast<std::size_t>(n))) {}
    ~Scratch() {
      fftw_free(in);
      fftw_free(out);
    }
    Scratch(const Scratch&) = delete;
    Scratch& operator=(const Scratch&) = delete;
  };

  Index nx_;
  Index ny_;
  std::shared_ptr<fftw_plan_s> fwd_;
  std::shared_ptr<fftw_plan_s> inv_;
  Vector fwd_scale_;
  Vector inv_scale_;
};

/// dct2(Nx, Ny) as an orthogonal operator B with adjoint B^T.
inline LinearOperator dct2(Index nx, Index ny) { return Dct2(nx, ny).as_operator(); }

}  // namespace priorkrylov
