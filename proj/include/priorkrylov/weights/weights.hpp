#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>

#include "priorkrylov/core/types.hpp"

namespace priorkrylov {

struct EqualWeights {};

/// Majorization-minimization weights ((z^2 + eps^2))^{(p-2)/4}.
struct MmWeights {
  double p = 1.0;
  double epsilon = 1e-2;
};

/// Thresholded variant without smoothing.
struct Mm5Weights {
  double p = 1.0;
  double tau1 = 1e-10;
  double tau2 = 1e-16;
};

/// Generalized-gamma hyper-prior weights from the IAS theta-update.
struct IasWeights {
  double r = -1.0;
  double beta = 1.0;
};

using WeightScheme = std::variant<EqualWeights, MmWeights, Mm5Weights, IasWeights>;

/// Named presets MM1..MM5 with p = 1.
inline WeightScheme mm_preset(int index) {
  switch (index) {
    case 1: return MmWeights{1.0, 1.0};
    case 2: return MmWeights{1.0, 1e-2};
    case 3: return MmWeights{1.0, 1e-3};
    case 4: return MmWeights{1.0, 1e-4};
    case 5: return Mm5Weights{};
    default: throw std::invalid_argument("mm_preset: index must be 1..5");
  }
}

inline bool is_ias(const WeightScheme& s) { return std::holds_alternative<IasWeights>(s); }

inline Vector mm_weights(const Vector& z, double p, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("mm_weights: eps must be positive");
  const double e = (p - 2.0) / 4.0;
  const double eps2 = eps * eps;
  return z.unaryExpr([e, eps2](double v) { return std::pow(v * v + eps2, e); });
}

inline Vector mm5_weights(const Vector& z, double p, double tau1, double tau2) {
  if (!(tau2 <= tau1)) throw std::invalid_argument("mm5_weights: tau2 <= tau1 required");
  const double e = (p - 2.0) / 2.0;
  const double floor_w = std::pow(tau2, e);
  return z.unaryExpr([=](double v) { return std::abs(v) >= tau1 ? std::pow(std::abs(v), e) : floor_w; });
}

/// Minimizer over theta > 0 of z^2/(2 theta) + (theta/vartheta)^r
/// - (r beta - 3/2) ln theta.
inline double ias_theta_update(double z, double r, double beta, double vartheta) {
  if (r == 0.0) throw std::invalid_argument("ias_theta_update: r must be nonzero");
  if (!(vartheta > 0.0)) throw std::invalid_argument("ias_theta_update: vartheta must be positive");
  const double z2 = z * z;
  if (r == 1.0) {
    const double eta = beta - 1.5;
    const double theta = 0.5 * vartheta * (eta + std::sqrt(eta * eta + 2.0 * z2 / vartheta));
    if (!(theta > 0.0)) throw DegenerateUpdate("ias_theta_update: minimizer at theta = 0");
    return theta;
  }
  if (r == -1.0) {
    if (!(beta + 1.5 > 0.0)) throw std::invalid_argument("ias_theta_update: beta + 3/2 must be positive");
    return (0.5 * z2 + vartheta) / (beta + 1.5);
  }

  // theta * f'(theta) is strictly increasing in theta, so in t = ln(theta)
  // the stationarity condition has a single root; bracket it, then polish
  // with Newton steps that fall back to bisection when they leave the bracket.
  const double c = r * beta - 1.5;
  const double log_vt = std::log(vartheta);
  auto F = [&](double t) { return -0.5 * z2 * std::exp(-t) + r * std::exp(r * (t - log_vt)) - c; };
  auto dF = [&](double t) { return 0.5 * z2 * std::exp(-t) + r * r * std::exp(r * (t - log_vt)); };

  const double lo_limit = std::log(1e-300);
  double hi = std::log(std::max(vartheta, z2) * 1e3);
  double lo = hi - 10.0;
  while (F(hi) < 0.0) hi += 10.0;
  while (F(lo) > 0.0) {
    lo -= 10.0;
    if (lo < lo_limit) throw DegenerateUpdate("ias_theta_update: minimizer at theta = 0");
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = F(t);
    if (f > 0.0) hi = t; else lo = t;
    double step_t = t - f / dF(t);
    if (!(step_t > lo && step_t < hi)) step_t = 0.5 * (lo + hi);
    if (std::abs(step_t - t) <= 1e-15 * std::max(1.0, std::abs(t))) {
      t = step_t;
      break;
    }
    t = step_t;
  }
  return std::exp(t);
}

struct IasState {
  Vector theta;
  double vartheta = 1.0;
};

struct IasResult {
  Vector w;
  IasState state;
};

/// IRLS weights (theta/vartheta)^{-1/2}, with theta floored at 1e-14 vartheta.
inline IasResult ias_weights(const Vector& z, double r, double beta, double vartheta) {
  IasResult out;
  out.state.vartheta = vartheta;
  out.state.theta.resize(z.size());
  const double theta_min = 1e-14 * vartheta;
  for (Index k = 0; k < z.size(); ++k) {
    double theta;
    try {
      theta = ias_theta_update(z(k), r, beta, vartheta);
    } catch (const DegenerateUpdate&) {
      theta = theta_min;
    }
    out.state.theta(k) = std::max(theta, theta_min);
  }
  out.w = (out.state.theta / vartheta).cwiseSqrt().cwiseInverse();
  return out;
}

/// Weights of a scheme at z; vartheta is used by IAS only.
inline Vector compute_weights(const WeightScheme& scheme, const Vector& z, double vartheta) {
  return std::visit(
      [&](const auto& s) -> Vector {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, EqualWeights>) {
          return Vector::Ones(z.size());
        } else if constexpr (std::is_same_v<T, MmWeights>) {
          return mm_weights(z, s.p, s.epsilon);
        } else if constexpr (std::is_same_v<T, Mm5Weights>) {
          return mm5_weights(z, s.p, s.tau1, s.tau2);
        } else {
          return ias_weights(z, s.r, s.beta, vartheta).w;
        }
      },
      scheme);
}

}  // namespace priorkrylov
