#include <gtest/gtest.h>

#include "priorkrylov/core/dense.hpp"
#include "priorkrylov/core/rng.hpp"
#include "priorkrylov/regparam/discrepancy.hpp"

namespace pk = priorkrylov;
using pk::Matrix;
using pk::Vector;

namespace {

Matrix upper(pk::CounterRng& rng, pk::Index n) {
  Matrix R = rng.normal_matrix(n, n).triangularView<Eigen::Upper>();
  R.diagonal().array() = R.diagonal().array().abs() + 0.5;
  return R;
}

}  // namespace

TEST(ProjectedRidge, ScalarClosedForm) {
  const Vector u = pk::projected_ridge_solve(Matrix::Identity(1, 1), Vector::Constant(1, 2.0), 1.0);
  EXPECT_NEAR(u(0), 1.0, 1e-15);
}

TEST(ProjectedRidge, LargePenaltyVanishes) {
  pk::CounterRng rng(1, 0);
  const Matrix R = upper(rng, 5);
  EXPECT_LT(pk::projected_ridge_solve(R, rng.normal_vector(5), 1e14).norm(), 1e-12);
}

TEST(ProjectedRidge, NormalEquations) {
  pk::CounterRng rng(2, 0);
  const Matrix R = upper(rng, 8);
  const Vector g = rng.normal_vector(8);
  const double mu = 0.37;
  const Vector u = pk::projected_ridge_solve(R, g, mu);
  const Vector res = (R.transpose() * R + mu * Matrix::Identity(8, 8)) * u - R.transpose() * g;
  EXPECT_LE(res.norm(), 1e-10);
}

TEST(DpPsi, ZeroBetaAndScalarRoot) {
  pk::CounterRng rng(3, 0);
  const Matrix R = upper(rng, 4);
  const Vector g = rng.normal_vector(4);
  pk::DpInput in{R, g, 0.3, 2.0};
  EXPECT_NEAR(pk::dp_psi(in, 0.0).value, g.squaredNorm() + 0.3 - 2.0, 1e-12);

  pk::DpInput scalar{Matrix::Identity(1, 1), Vector::Constant(1, 2.0), 0.0, 1.0};
  EXPECT_NEAR(pk::dp_psi(scalar, 1.0).value, 0.0, 1e-15);
  auto res = pk::dp_select_mu(scalar, 1e-7, 1e7);
  EXPECT_TRUE(res.root_found);
  EXPECT_NEAR(res.mu, 1.0, 1e-9);
}

TEST(DpPsi, DerivativeMatchesFiniteDifference) {
  pk::CounterRng rng(4, 0);
  for (int t = 0; t < 10; ++t) {
    pk::DpInput in{upper(rng, 6), rng.normal_vector(6), 0.1, 1.0};
    const double beta = rng.uniform(0.05, 3.0);
    const double h = 1e-6 * beta;
    const double fd = (pk::dp_psi(in, beta + h).value - pk::dp_psi(in, beta - h).value) / (2 * h);
    const double d = pk::dp_psi(in, beta).derivative;
    EXPECT_LT(d, 0.0);
    EXPECT_NEAR(d, fd, 1e-6 * std::abs(d));
  }
}

TEST(DpPsi, DecreasingAndConvex) {
  pk::CounterRng rng(5, 0);
  pk::DpInput in{upper(rng, 6), rng.normal_vector(6), 0.0, 1.0};
  double prev = pk::dp_psi(in, 0.0).value, prev_d = pk::dp_psi(in, 0.0).derivative;
  for (double beta = 0.1; beta < 20; beta += 0.1) {
    const auto v = pk::dp_psi(in, beta);
    EXPECT_LT(v.value, prev);
    EXPECT_GE(v.derivative, prev_d);
    prev = v.value;
    prev_d = v.derivative;
  }
}

TEST(DpSelect, IdentitySystem) {
  // A = I2, b = (1, 0): residual^2 = 1/(1+beta)^2 = 1/4 at beta = 1.
  pk::DpInput in{Matrix::Identity(2, 2), Vector::Unit(2, 0), 0.0, 0.25};
  auto res = pk::dp_select_mu(in, 1e-7, 1e7);
  EXPECT_TRUE(res.root_found);
  EXPECT_NEAR(res.mu, 1.0, 1e-9);
}

TEST(DpSelect, TargetAboveDataFallsBack) {
  pk::DpInput in{Matrix::Identity(2, 2), Vector::Unit(2, 0), 0.0, 4.0};
  auto res = pk::dp_select_mu(in, 1e-7, 1e7);
  EXPECT_FALSE(res.root_found);
  EXPECT_EQ(res.mu, 1e-7);
}

TEST(DpSelect, UnreachableTargetFallsBack) {
  // Offset alone exceeds the target, so psi never reaches zero.
  pk::DpInput in{Matrix::Identity(2, 2), Vector::Ones(2), 3.0, 1.0};
  auto res = pk::dp_select_mu(in, 1e-7, 1e7);
  EXPECT_FALSE(res.root_found);
  EXPECT_EQ(res.mu, 1e-7);
}

TEST(DpSelect, NewtonMonotoneAndConsistent) {
  pk::CounterRng rng(6, 0);
  for (int t = 0; t < 10; ++t) {
    const Matrix R = upper(rng, 10);
    const Vector g = rng.normal_vector(10) * 3.0;
    const double offset = 0.5;
    const double target = offset + 0.3 * g.squaredNorm();
    pk::DpInput in{R, g, offset, target};
    auto res = pk::dp_select_mu(in, 1e-7, 1e7);
    ASSERT_TRUE(res.root_found);
    for (std::size_t k = 1; k < res.beta_trace.size(); ++k) {
      EXPECT_GE(res.beta_trace[k], res.beta_trace[k - 1]);
      EXPECT_LE(res.psi_trace[k], res.psi_trace[k - 1]);
      EXPECT_GE(res.psi_trace[k], -1e-10 * target);
    }
    const Vector u = pk::projected_ridge_solve(R, g, res.mu);
    EXPECT_NEAR((R * u - g).squaredNorm() + offset, target, 1e-6 * target);
  }
}

TEST(DpSelect, ProjectedMatchesFullResidual) {
  // phi via the full residual equals the projected residual plus the offset.
  pk::CounterRng rng(7, 0);
  const Matrix Abar = rng.normal_matrix(30, 12);
  const Matrix V = pk::economic_qr(rng.normal_matrix(12, 5)).Q;
  const Vector b = rng.normal_vector(30);
  const auto qr = pk::economic_qr(Abar * V);
  const Vector g = qr.Q.transpose() * b;
  const double offset = b.squaredNorm() - g.squaredNorm();
  const double mu = 0.8;
  const Vector u = pk::projected_ridge_solve(qr.R, g, mu);
  const double full = (Abar * V * u - b).squaredNorm();
  const double proj = (qr.R * u - g).squaredNorm() + offset;
  EXPECT_NEAR(full, proj, 1e-9 * full);
}

TEST(DpSelect, ClampsToWindow) {
  pk::DpInput in{Matrix::Identity(1, 1), Vector::Constant(1, 2.0), 0.0, 1.0};
  auto res = pk::dp_select_mu(in, 2.0, 10.0);
  EXPECT_TRUE(res.root_found);
  EXPECT_TRUE(res.clamped);
  EXPECT_EQ(res.mu, 2.0);
}

TEST(DpSelect, SplitFallbackPolicy) {
  pk::DpInput noisy{Matrix::Identity(2, 2), Vector::Ones(2), 3.0, 1.0};
  auto hi = pk::dp_select_mu(noisy, 1e-7, 1e7, pk::DpFallback::split);
  EXPECT_FALSE(hi.root_found);
  EXPECT_EQ(hi.mu, 1e7);
  pk::DpInput quiet{Matrix::Identity(2, 2), Vector::Unit(2, 0), 0.0, 4.0};
  auto lo = pk::dp_select_mu(quiet, 1e-7, 1e7, pk::DpFallback::split);
  EXPECT_FALSE(lo.root_found);
  EXPECT_EQ(lo.mu, 1e-7);
}
