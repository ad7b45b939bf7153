#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "priorkrylov/core/types.hpp"

namespace priorkrylov {

inline double rre(const Vector& x, const Vector& x_true) {
  const double n = x_true.norm();
  if (!(n > 0.0)) throw ZeroTruth("rre: zero reference");
  return (x - x_true).norm() / n;
}

/// Sorted-Lorenz Gini index of |c|: 0 for constant magnitudes, 1 - 1/K for
/// a one-hot vector.
inline double gini_index(const Vector& c) {
  const Index K = c.size();
  std::vector<double> m(static_cast<std::size_t>(K));
  for (Index i = 0; i < K; ++i) m[static_cast<std::size_t>(i)] = std::abs(c(i));
  std::sort(m.begin(), m.end());
  double l1 = 0.0;
  for (double v : m) l1 += v;
  if (!(l1 > 0.0)) throw ZeroVector("gini_index: zero vector");
  const double kd = static_cast<double>(K);
  double acc = 0.0;
  for (Index k = 1; k <= K; ++k) {
    acc += (m[static_cast<std::size_t>(k - 1)] / l1) * ((kd - static_cast<double>(k) + 0.5) / kd);
  }
  return 1.0 - 2.0 * acc;
}

namespace detail {

inline std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> g(static_cast<std::size_t>(size));
  const double c = 0.5 * (size - 1);
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - c;
    g[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += g[static_cast<std::size_t>(i)];
  }
  for (double& v : g) v /= total;
  return g;
}

// "Valid" separable filtering of a rows-by-cols image stored row by row.
// Axes shorter than the window are left unfiltered.
inline Matrix filter_valid(const Matrix& img, const std::vector<double>& g) {
  const Index n = static_cast<Index>(g.size());
  Matrix a = img;
  if (a.rows() >= n) {
    Matrix t(a.rows() - n + 1, a.cols());
    for (Index i = 0; i < t.rows(); ++i) {
      t.row(i).setZero();
      for (Index k = 0; k < n; ++k) t.row(i) += g[static_cast<std::size_t>(k)] * a.row(i + k);
    }
    a = t;
  }
  if (a.cols() >= n) {
    Matrix t(a.rows(), a.cols() - n + 1);
    for (Index j = 0; j < t.cols(); ++j) {
      t.col(j).setZero();
      for (Index k = 0; k < n; ++k) t.col(j) += g[static_cast<std::size_t>(k)] * a.col(j + k);
    }
    a = t;
  }
  return a;
}

}  // namespace detail

/// Mean structural similarity with an 11-tap Gaussian window (sigma 1.5).
/// Images use the library layout (row index slowest); a 1D signal is an
/// image with one row.
inline double ssim(const Vector& x, const Vector& x_true, Index rows, Index cols) {
  if (x.size() != x_true.size() || x.size() != rows * cols) {
    throw std::invalid_argument("ssim: shape mismatch");
  }
  // Column-major rows-by-cols view of a row-major image is its transpose;
  // SSIM is invariant to that.
  const Matrix X = Eigen::Map<const Matrix>(x.data(), cols, rows);
  const Matrix Y = Eigen::Map<const Matrix>(x_true.data(), cols, rows);
  const double L = x_true.maxCoeff() - x_true.minCoeff();
  const double c1 = (0.01 * L) * (0.01 * L);
  const double c2 = (0.03 * L) * (0.03 * L);
  const auto g = detail::gaussian_window(11, 1.5);
  const Matrix mx = detail::filter_valid(X, g);
  const Matrix my = detail::filter_valid(Y, g);
  const Matrix sxx = detail::filter_valid(X.cwiseProduct(X), g) - mx.cwiseProduct(mx);
  const Matrix syy = detail::filter_valid(Y.cwiseProduct(Y), g) - my.cwiseProduct(my);
  const Matrix sxy = detail::filter_valid(X.cwiseProduct(Y), g) - mx.cwiseProduct(my);
  const Eigen::ArrayXXd num =
      (2.0 * mx.array() * my.array() + c1) * (2.0 * sxy.array() + c2);
  const Eigen::ArrayXXd den =
      (mx.array().square() + my.array().square() + c1) * (sxx.array() + syy.array() + c2);
  return (num / den).mean();
}

}  // namespace priorkrylov
