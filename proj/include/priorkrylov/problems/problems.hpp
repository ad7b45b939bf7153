#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "priorkrylov/core/linear_operator.hpp"
#include "priorkrylov/core/rng.hpp"
#include "priorkrylov/metrics/metrics.hpp"
#include "priorkrylov/solvers/types.hpp"
#include "priorkrylov/transforms/dct.hpp"
#include "priorkrylov/transforms/sparsifying.hpp"

namespace priorkrylov {

struct ProblemInstance {
  std::string kind;
  LinearOperator A;
  SparsifyingTransform psi;
  Vector b;
  Vector x_true;
  Vector e;
  double sigma_nl = 0.0;
  std::uint64_t seed = 0;
  Index image_rows = 1;  // 1 for signals
  Index image_cols = 0;

  /// RRE and SSIM hooks against x_true.
  Monitor monitor() const {
    Monitor m;
    if (x_true.size() == 0) return m;
    const Vector truth = x_true;
    const Index r = image_rows;
    const Index c = image_cols;
    m.rre = [truth](const Vector& x) { return priorkrylov::rre(x, truth); };
    m.ssim = [truth, r, c](const Vector& x) { return priorkrylov::ssim(x, truth, r, c); };
    return m;
  }
};

namespace detail {

// Random streams derived from the run seed.
inline constexpr std::uint64_t kNoiseStream = 1;

// Scales x_true so that sqrt(M) / ||A x_true|| equals sigma, then adds
// standard normal noise.
inline void finish_instance(ProblemInstance& p, const Vector& x_raw, double sigma, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw std::invalid_argument("noise level must be positive");
  const Vector a_raw = p.A.apply(x_raw);
  const double m = static_cast<double>(p.A.rows());
  const double scale = std::sqrt(m) / (sigma * a_raw.norm());
  p.x_true = scale * x_raw;
  CounterRng rng(seed, kNoiseStream);
  p.e = rng.normal_vector(p.A.rows());
  p.b = scale * a_raw + p.e;
  p.sigma_nl = sigma;
  p.seed = seed;
  p.A = p.A.with_fresh_counter();
}

}  // namespace detail

/// Piecewise-constant reference signal: level k on [f_{k-1}, f_k) of the
/// index range with f_{-1} = 0; the last level continues to the end.
inline Vector piecewise_signal(Index n) {
  static constexpr std::array<double, 6> breaks{0.1, 0.25, 0.4, 0.6, 0.75, 0.9};
  static constexpr std::array<double, 6> levels{0.0, 1.0, -0.5, 2.0, 0.5, 0.0};
  Vector x(n);
  for (Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    std::size_t seg = 0;
    while (seg < breaks.size() && t >= breaks[seg]) ++seg;
    x(i) = levels[std::min(seg, levels.size() - 1)];
  }
  return x;
}

/// First M rows of the orthonormal DCT-II matrix of size N.
inline Matrix partial_dct_matrix(Index n, Index m) { return dct_matrix(n).topRows(m); }

inline ProblemInstance make_1d_dct_problem(Index n = 1000, Index m = 50, double sigma = 0.03,
                                           std::uint64_t seed = 0) {
  if (m > n) throw std::invalid_argument("make_1d_dct_problem: M <= N required");
  ProblemInstance p;
  p.kind = "dct1d";
  p.A = LinearOperator::from_dense(partial_dct_matrix(n, m));
  p.psi = d1_dirichlet(n);
  p.image_rows = 1;
  p.image_cols = n;
  detail::finish_instance(p, piecewise_signal(n), sigma, seed);
  return p;
}

struct Ellipse {
  double intensity, a, b, x0, y0, phi_deg;
};

/// Ten-ellipse Shepp-Logan phantom with the higher-contrast intensities of
/// Toft, sampled at pixel centers of an n-by-n grid on [-1, 1]^2.
inline Vector shepp_logan(Index n) {
  static constexpr std::array<Ellipse, 10> ellipses{{
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
      {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
      {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
      {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
      {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
      {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
      {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
      {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
      {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
      {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
  }};
  Vector img = Vector::Zero(n * n);
  const double nd = static_cast<double>(n);
  for (Index r = 0; r < n; ++r) {
    const double y = 1.0 - (2.0 * static_cast<double>(r) + 1.0) / nd;
    for (Index c = 0; c < n; ++c) {
      const double x = -1.0 + (2.0 * static_cast<double>(c) + 1.0) / nd;
      double v = 0.0;
      for (const Ellipse& e : ellipses) {
        const double phi = e.phi_deg * std::numbers::pi / 180.0;
        const double dx = x - e.x0;
        const double dy = y - e.y0;
        const double u = dx * std::cos(phi) + dy * std::sin(phi);
        const double t = -dx * std::sin(phi) + dy * std::cos(phi);
        if ((u * u) / (e.a * e.a) + (t * t) / (e.b * e.b) <= 1.0) v += e.intensity;
      }
      img(c + n * r) = v;
    }
  }
  return img;
}

inline Index detector_count(Index n) {
  return static_cast<Index>(std::ceil(std::sqrt(2.0) * static_cast<double>(n)));
}

/// Pixel-driven parallel-beam projector: each pixel center is projected onto
/// the detector and its value split linearly between the two nearest bins.
/// Angles are equispaced on [0, 2 pi); detector spacing is one pixel.
inline SparseMatrix radon_matrix(Index n, Index n_angles) {
  const Index nd = detector_count(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(2 * n * n * n_angles));
  const double half = 0.5 * static_cast<double>(n - 1);
  const double dhalf = 0.5 * static_cast<double>(nd - 1);
  for (Index k = 0; k < n_angles; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_angles);
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    for (Index r = 0; r < n; ++r) {
      const double py = half - static_cast<double>(r);
      for (Index c = 0; c < n; ++c) {
        const double px = static_cast<double>(c) - half;
        const double t = px * ct + py * st + dhalf;
        Index i0 = static_cast<Index>(std::floor(t));
        double frac = t - static_cast<double>(i0);
        if (i0 >= nd - 1) {
          i0 = nd - 2;
          frac = 1.0;
        }
        const Index col = c + n * r;
        if (1.0 - frac > 0.0) trip.emplace_back(k * nd + i0, col, 1.0 - frac);
        if (frac > 0.0) trip.emplace_back(k * nd + i0 + 1, col, frac);
      }
    }
  }
  SparseMatrix A(n_angles * nd, n * n);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

inline ProblemInstance make_ct_problem(Index n = 64, Index n_angles = 28, double sigma = 0.01,
                                       std::uint64_t seed = 0) {
  if (n < 16) throw std::invalid_argument("make_ct_problem: n >= 16 required");
  ProblemInstance p;
  p.kind = "ct2d";
  p.A = LinearOperator::from_sparse(radon_matrix(n, n_angles));
  p.psi = d2_aniso_neumann(n, n);
  p.image_rows = n;
  p.image_cols = n;
  detail::finish_instance(p, shepp_logan(n), sigma, seed);
  return p;
}

}  // namespace priorkrylov
