#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "priorkrylov/core/dense.hpp"

namespace priorkrylov {

/// Projected data for the discrepancy principle: minimize ||R u - g||^2 +
/// mu ||u||^2, where resid_offset is the part of the data residual that the
/// subspace cannot reach. R may be rectangular.
struct DpInput {
  Matrix R;
  Vector g;
  double resid_offset = 0.0;
  double target = 1.0;
};

/// What to return when the DP function has no root in the window. mu_min
/// throughout, or split: mu_min when the data already sit below the target
/// and mu_max when psi stays positive.
enum class DpFallback { mu_min, split };

struct DpConfig {
  double tau = 1.01;
  double mu_min = 1e-7;
  double mu_max = 1e7;
  DpFallback fallback = DpFallback::mu_min;
};

struct DpResult {
  double mu = 1.0;
  bool root_found = false;
  bool clamped = false;
  int newton_iters = 0;
  double psi_at_mu = 0.0;
  std::vector<double> beta_trace;
  std::vector<double> psi_trace;
};

/// tau^2 times the expected noise energy ||e||^2 ~ M.
inline double dp_target(double tau, Index m) { return tau * tau * static_cast<double>(m); }

/// SVD-based evaluation of the projected ridge problem and its DP function.
class DpProblem {
 public:
  explicit DpProblem(const DpInput& in) : in_(in) {
    if (in.R.rows() != in.g.size()) throw std::invalid_argument("DpProblem: R and g mismatch");
    if (in.R.size() == 0) {
      s_ = Vector(0);
      ghat_ = Vector(0);
      W_ = Matrix(in.R.cols(), 0);
      unreachable_ = in.g.squaredNorm();
      return;
    }
    SvdFactors f = thin_svd(in.R);
    const Index rank = numerical_rank(f.s, in.R.rows(), in.R.cols());
    s_ = f.s.head(rank);
    W_ = f.W.leftCols(rank);
    ghat_ = f.U.leftCols(rank).transpose() * in.g;
    unreachable_ = std::max(in.g.squaredNorm() - ghat_.squaredNorm(), 0.0);
  }

  double psi(double beta) const {
    double acc = unreachable_ + in_.resid_offset - in_.target;
    for (Index i = 0; i < s_.size(); ++i) {
      const double d = 1.0 + beta * s_(i) * s_(i);
      acc += ghat_(i) * ghat_(i) / (d * d);
    }
    return acc;
  }

  double dpsi(double beta) const {
    double acc = 0.0;
    for (Index i = 0; i < s_.size(); ++i) {
      const double s2 = s_(i) * s_(i);
      const double d = 1.0 + beta * s2;
      acc -= 2.0 * ghat_(i) * ghat_(i) * s2 / (d * d * d);
    }
    return acc;
  }

  /// Limit of psi as beta -> infinity (unregularized projected fit).
  double psi_infinity() const { return unreachable_ + in_.resid_offset - in_.target; }

  Vector solve(double mu) const {
    Vector coeff(s_.size());
    for (Index i = 0; i < s_.size(); ++i) coeff(i) = s_(i) / (s_(i) * s_(i) + mu) * ghat_(i);
    return W_ * coeff;
  }

  /// ||R u - g||^2 + resid_offset at the ridge solution for mu.
  double residual(double mu) const {
    const Vector u = solve(mu);
    return (in_.R * u - in_.g).squaredNorm() + in_.resid_offset;
  }

  const Vector& singular_values() const { return s_; }
  double target() const { return in_.target; }

 private:
  DpInput in_;
  Vector s_;
  Vector ghat_;
  Matrix W_;
  double unreachable_ = 0.0;
};

/// u minimizing ||R u - g||^2 + mu ||u||^2.
inline Vector projected_ridge_solve(const Matrix& R, const Vector& g, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("projected_ridge_solve: mu must be positive");
  return DpProblem(DpInput{R, g, 0.0, 1.0}).solve(mu);
}

struct DpPsi {
  double value;
  double derivative;
};

inline DpPsi dp_psi(const DpInput& in, double beta) {
  DpProblem p(in);
  return {p.psi(beta), p.dpsi(beta)};
}

/// Newton iteration in beta = 1/mu from beta = 0 on the convex, decreasing
/// DP function. Without a root in the window (psi(0) <= 0, or psi never
/// crosses zero) root_found is false and mu follows the fallback policy.
inline DpResult dp_select_mu(const DpProblem& p, double mu_min, double mu_max,
                             DpFallback fallback = DpFallback::mu_min) {
  DpResult res;
  const double target = p.target();
  const double psi0 = p.psi(0.0);
  if (psi0 <= 0.0 || p.psi_infinity() >= 0.0) {
    const bool never_crosses = psi0 > 0.0;
    res.mu = (fallback == DpFallback::split && never_crosses) ? mu_max : mu_min;
    res.psi_at_mu = p.psi(1.0 / res.mu);
    return res;
  }
  double beta = 0.0;
  double psi = psi0;
  res.beta_trace.push_back(beta);
  res.psi_trace.push_back(psi);
  const double tol = 1e-10 * target;
  int it = 0;
  while (std::abs(psi) > tol && it < 100) {
    const double d = p.dpsi(beta);
    if (!(d < 0.0)) break;
    double next = beta - psi / d;
    double psi_next = p.psi(next);
    // Roundoff can push a step past the root; bisect back toward it so
    // the iterates stay on the left of the root.
    int guard = 0;
    while (psi_next < -tol && guard < 60) {
      next = 0.5 * (beta + next);
      psi_next = p.psi(next);
      ++guard;
    }
    if (next == beta) break;
    beta = next;
    psi = psi_next;
    ++it;
    res.beta_trace.push_back(beta);
    res.psi_trace.push_back(psi);
  }
  res.newton_iters = it;
  res.root_found = true;
  double mu = beta > 0.0 ? 1.0 / beta : std::numeric_limits<double>::infinity();
  if (mu < mu_min || mu > mu_max) {
    res.clamped = true;
    mu = std::clamp(mu, mu_min, mu_max);
  }
  res.mu = mu;
  res.psi_at_mu = p.psi(1.0 / mu);
  return res;
}

inline DpResult dp_select_mu(const DpInput& in, double mu_min, double mu_max,
                             DpFallback fallback = DpFallback::mu_min) {
  return dp_select_mu(DpProblem(in), mu_min, mu_max, fallback);
}

}  // namespace priorkrylov
