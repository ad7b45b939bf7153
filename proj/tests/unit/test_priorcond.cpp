#include <gtest/gtest.h>

#include "priorkrylov/core/rng.hpp"
#include "priorkrylov/priorcond/oblique.hpp"
#include "priorkrylov/priorcond/pinv.hpp"

namespace pk = priorkrylov;
using pk::Matrix;
using pk::Vector;

namespace {

Matrix svd_pinv(const Matrix& c) {
  Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector s = svd.singularValues();
  for (pk::Index i = 0; i < s.size(); ++i) s(i) = s(i) > 1e-10 * s(0) ? 1.0 / s(i) : 0.0;
  return svd.matrixV() * s.asDiagonal() * svd.matrixU().transpose();
}

double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

TEST(XKernel, EmptyKernel) {
  pk::CounterRng rng(1, 0);
  auto A = pk::LinearOperator::from_dense(rng.normal_matrix(5, 4));
  const Vector b = rng.normal_vector(5);
  auto split = pk::x_kernel(A, Matrix(4, 0), b);
  EXPECT_EQ(split.x_ker, Vector::Zero(4));
  EXPECT_EQ(split.b_bar, b);
}

TEST(XKernel, MeanProjection) {
  auto A = pk::LinearOperator::from_dense(Matrix::Identity(2, 2));
  const Matrix K = Vector::Constant(2, 1.0 / std::sqrt(2.0));
  auto split = pk::x_kernel(A, K, Vector((Vector(2) << 1, 3).finished()));
  EXPECT_NEAR(split.x_ker(0), 2.0, 1e-14);
  EXPECT_NEAR(split.x_ker(1), 2.0, 1e-14);
  EXPECT_NEAR(split.b_bar(0), -1.0, 1e-14);
  EXPECT_NEAR(split.b_bar(1), 1.0, 1e-14);
}

TEST(XKernel, LeastSquaresOracle) {
  pk::CounterRng rng(2, 0);
  const Matrix Ad = rng.normal_matrix(12, 8);
  auto A = pk::LinearOperator::from_dense(Ad);
  const Matrix K = pk::d1_neumann(8).kernel;
  const Vector b = rng.normal_vector(12);
  auto split = pk::x_kernel(A, K, b);
  const Matrix AK = Ad * K;
  const Vector proj = AK * (AK.transpose() * AK).ldlt().solve(AK.transpose() * b);
  EXPECT_LT((Ad * split.x_ker - proj).norm(), 1e-10);
  EXPECT_LT((K * (K.transpose() * split.x_ker) - split.x_ker).norm(), 1e-12);
}

TEST(XKernel, SingularKernelImage) {
  Matrix Ad = Matrix::Zero(3, 3);
  Ad(0, 0) = 1;
  Ad(1, 1) = 1;
  Ad(2, 0) = 1;
  Ad(2, 1) = -1;
  Ad.col(2) = -(Ad.col(0) + Ad.col(1));  // A * 1 = 0
  EXPECT_THROW(pk::x_kernel(pk::LinearOperator::from_dense(Ad), pk::d1_neumann(3).kernel, Vector::Ones(3)),
               pk::SingularKernelImage);
}

TEST(WeightedPinv, InvertibleCase) {
  auto psi = pk::d1_dirichlet(10);
  pk::CounterRng rng(3, 0);
  const Vector y = rng.normal_vector(10);
  const Vector x = pk::weighted_pinv_apply(psi, Vector::Ones(10), y, pk::PinvStrategy::dense());
  EXPECT_LT((psi.apply(x) - y).norm(), 1e-10);
}

TEST(WeightedPinv, PenroseConditions) {
  auto psi = pk::d1_neumann(4);
  pk::CounterRng rng(4, 0);
  const Vector w = rng.uniform_vector(4, 0.2, 3.0);
  const Matrix C = w.asDiagonal() * psi.dense();
  const Matrix X = pk::WeightedPinv(psi, w, pk::PinvStrategy::dense()).dense();
  EXPECT_LT((C * X * C - C).norm(), 1e-8);
  EXPECT_LT((X * C * X - X).norm(), 1e-8);
  EXPECT_LT((C * X - (C * X).transpose()).norm(), 1e-8);
  EXPECT_LT((X * C - (X * C).transpose()).norm(), 1e-8);
  EXPECT_LT((X - svd_pinv(C)).norm(), 1e-10);
}

TEST(WeightedPinv, TransposeMatchesDense) {
  auto psi = pk::d1_neumann(7);
  pk::CounterRng rng(5, 0);
  const Vector w = rng.uniform_vector(7, 0.5, 2.0);
  pk::WeightedPinv p(psi, w, pk::PinvStrategy::dense());
  EXPECT_LT((p.transpose(Matrix::Identity(7, 7)) - p.dense().transpose()).norm(), 1e-12);
}

TEST(WeightedPinv, StrategiesAgree) {
  const pk::Index n = 16;
  auto psi = pk::d2_aniso_neumann(n, n);
  pk::CounterRng rng(6, 0);
  const Vector w = rng.log_uniform_vector(psi.rows, 0.1, 10.0);
  // y in col(Psi_l) so the three strategies target the same least-squares solution.
  const Vector y = w.asDiagonal() * psi.apply(rng.normal_vector(n * n));
  const Matrix oracle = svd_pinv(w.asDiagonal() * psi.dense());
  const Vector ref = oracle * y;
  const Vector pcg = pk::weighted_pinv_apply(psi, w, y, pk::PinvStrategy::pcg_dct(1e-10, 2000));
  const Vector delta = pk::weighted_pinv_apply(psi, w, y, pk::PinvStrategy::delta_regularized(1e-10));
  const Vector dense = pk::weighted_pinv_apply(psi, w, y, pk::PinvStrategy::dense());
  EXPECT_LT(rel(dense, ref), 1e-10);
  EXPECT_LT(rel(pcg, ref), 1e-7);
  EXPECT_LT(rel(delta, ref), 1e-5);
}

TEST(WeightedPinv, PcgTransposeMatchesOracle) {
  const pk::Index n = 8;
  auto psi = pk::d2_aniso_neumann(n, n);
  pk::CounterRng rng(7, 0);
  const Vector w = rng.uniform_vector(psi.rows, 0.5, 2.0);
  const Vector v = rng.normal_vector(n * n);
  const Matrix oracle = svd_pinv(w.asDiagonal() * psi.dense());
  pk::WeightedPinv p(psi, w, pk::PinvStrategy::pcg_dct(1e-12, 2000));
  EXPECT_LT(rel(p.transpose(v), oracle.transpose() * v), 1e-8);
}

TEST(PcgDct, ExactPreconditionerConvergesAtOnce) {
  const pk::Index n = 12;
  auto psi = pk::d2_aniso_neumann(n, n);
  pk::DctPreconditioner M(psi);
  pk::CounterRng rng(8, 0);
  Vector v = rng.normal_vector(n * n);
  v.array() -= v.mean();
  const Vector y = psi.adjoint(psi.apply(v));
  int iters = -1;
  const Matrix xi = pk::pcg_dct_solve(psi, Vector::Ones(psi.rows), y, 1e-10, 50, M, &iters);
  EXPECT_LE(iters, 2);
  EXPECT_LT((xi.col(0) - v).norm(), 1e-8 * v.norm());
}

TEST(PcgDct, WideWeightSpreadMatchesDense) {
  const pk::Index n = 16;
  auto psi = pk::d2_aniso_neumann(n, n);
  pk::DctPreconditioner M(psi);
  pk::CounterRng rng(9, 0);
  const Vector w = rng.log_uniform_vector(psi.rows, 1e-3, 1.0);
  const Vector y = psi.adjoint(rng.normal_vector(psi.rows));
  const double tol = 1e-9;
  const Matrix xi = pk::pcg_dct_solve(psi, w, y, tol, 5000, M);
  const Matrix G = psi.dense().transpose() * w.cwiseAbs2().asDiagonal() * psi.dense();
  const Vector ref = svd_pinv(G) * y;
  EXPECT_LT(rel(xi.col(0), ref), tol * 10);
  EXPECT_LT(rel(G * xi.col(0), y), 1e-6);
}

TEST(PcgDct, ZeroRightHandSide) {
  auto psi = pk::d2_aniso_neumann(4, 4);
  pk::DctPreconditioner M(psi);
  int iters = -1;
  const Matrix xi = pk::pcg_dct_solve(psi, Vector::Ones(psi.rows), Vector::Zero(16), 1e-8, 10, M, &iters);
  EXPECT_EQ(iters, 0);
  EXPECT_EQ(xi.norm(), 0.0);
}

TEST(PcgDct, ReportsNonConvergence) {
  auto psi = pk::d2_aniso_neumann(16, 16);
  pk::DctPreconditioner M(psi);
  pk::CounterRng rng(10, 0);
  const Vector w = rng.log_uniform_vector(psi.rows, 1e-4, 1.0);
  const Vector y = psi.adjoint(rng.normal_vector(psi.rows));
  try {
    pk::pcg_dct_solve(psi, w, y, 1e-12, 2, M);
    FAIL() << "expected CgNoConvergence";
  } catch (const pk::CgNoConvergence& e) {
    EXPECT_GT(e.residual(), 1e-12);
  }
}

TEST(PcgDct, PreconditionerEigenvaluesMatchLaplacian) {
  const pk::Index n = 8;
  auto psi = pk::d2_aniso_neumann(n, n);
  pk::DctPreconditioner M(psi);
  const Matrix B = M.dct().forward(Matrix::Identity(n * n, n * n));
  const Matrix L = psi.dense().transpose() * psi.dense();
  EXPECT_LT((B.transpose() * M.eigenvalues().asDiagonal() * B - L).norm(), 1e-8);
}

TEST(WeightedLaplacian, FusedStencilMatchesComposition) {
  const pk::Index nx = 6, ny = 5;
  auto psi = pk::d2_aniso_neumann(nx, ny);
  pk::CounterRng rng(11, 0);
  const Vector w2 = rng.uniform_vector(psi.rows, 0.1, 4.0);
  const Matrix X = rng.normal_matrix(nx * ny, 3);
  const Matrix ref = psi.adjoint_block(w2.asDiagonal() * psi.apply_block(X));
  EXPECT_LT((pk::detail::aniso_weighted_laplacian(nx, ny, w2, X) - ref).norm(), 1e-11);
}

namespace {

struct ObliqueSetup {
  Matrix Ad;
  pk::LinearOperator A;
  pk::SparsifyingTransform psi = pk::d1_neumann(5);
  Vector w;
  Vector b;
  pk::KernelSplit split;
};

ObliqueSetup make_setup(std::uint64_t seed) {
  ObliqueSetup s;
  pk::CounterRng rng(seed, 0);
  s.Ad = rng.normal_matrix(6, 5);
  s.A = pk::LinearOperator::from_dense(s.Ad);
  s.w = rng.uniform_vector(5, 0.3, 2.0);
  s.b = rng.normal_vector(6);
  s.split = pk::x_kernel(s.A, s.psi.kernel, s.b);
  return s;
}

}  // namespace

TEST(ObliquePinv, ProjectorIsIdempotent) {
  auto s = make_setup(12);
  auto ob = pk::oblique_pinv(s.psi, s.w, pk::PinvStrategy::dense(), s.A, s.split.cache);
  pk::CounterRng rng(13, 0);
  const Vector x = rng.normal_vector(5);
  const Matrix ex = ob.project(x);
  EXPECT_LT((ob.project(ex) - ex).norm(), 1e-10);
  // A E K c is orthogonal to col(A K); in fact E K = 0.
  const Vector ekc = ob.project(s.psi.kernel * 1.7);
  EXPECT_LT(((s.Ad * s.psi.kernel).transpose() * (s.Ad * ekc)).norm(), 1e-10);
}

TEST(ObliquePinv, ReducesToInverseWithoutKernel) {
  pk::CounterRng rng(14, 0);
  auto A = pk::LinearOperator::from_dense(rng.normal_matrix(7, 6));
  auto psi = pk::d1_dirichlet(6);
  const Vector w = rng.uniform_vector(6, 0.5, 2.0);
  auto split = pk::x_kernel(A, psi.kernel, rng.normal_vector(7));
  auto ob = pk::oblique_pinv(psi, w, pk::PinvStrategy::dense(), A, split.cache);
  const Matrix inv = (w.asDiagonal() * psi.dense()).inverse();
  EXPECT_LT((ob.as_operator().to_dense() - inv).norm(), 1e-10);
}

TEST(ObliquePinv, StandardFormEquivalence) {
  auto s = make_setup(15);
  const double mu = 0.7;
  const Matrix C = s.w.asDiagonal() * s.psi.dense();
  const Vector lhs = (s.Ad.transpose() * s.Ad + mu * C.transpose() * C).ldlt().solve(s.Ad.transpose() * s.b);

  auto ob = pk::oblique_pinv(s.psi, s.w, pk::PinvStrategy::dense(), s.A, s.split.cache);
  const Matrix Ab = pk::abar(ob).as_operator().to_dense();
  const Vector z = (Ab.transpose() * Ab + mu * Matrix::Identity(5, 5)).ldlt().solve(Ab.transpose() * s.split.b_bar);
  const Vector rhs = ob.apply(z).col(0) + s.split.x_ker;
  EXPECT_LT((lhs - rhs).norm(), 1e-8 * lhs.norm());
}

TEST(Abar, MatchesDenseCompositionAndAdjoint) {
  auto s = make_setup(16);
  auto ob = pk::oblique_pinv(s.psi, s.w, pk::PinvStrategy::dense(), s.A, s.split.cache);
  const Matrix Kd = s.psi.kernel;
  const Matrix AK = s.Ad * Kd;
  const Matrix E = Matrix::Identity(5, 5) - Kd * svd_pinv(AK) * s.Ad;
  const Matrix ref = s.Ad * E * svd_pinv(s.w.asDiagonal() * s.psi.dense());
  auto op = pk::abar(ob).as_operator();
  EXPECT_LT((op.to_dense() - ref).norm(), 1e-10);
  pk::CounterRng rng(17, 0);
  for (int t = 0; t < 20; ++t) {
    const Vector u = rng.normal_vector(5);
    const Vector v = rng.normal_vector(6);
    EXPECT_LE(std::abs(op.apply(u).dot(v) - u.dot(op.adjoint(v))), 1e-8 * (u.norm() * v.norm() + 1));
  }
}

TEST(ObliquePinv, CountsPseudoinverseApplications) {
  auto s = make_setup(18);
  auto counter = std::make_shared<pk::MatvecCounter>();
  auto ob = pk::oblique_pinv(s.psi, s.w, pk::PinvStrategy::dense(), s.A, s.split.cache, counter);
  auto ab = pk::abar(ob);
  ab.apply(Matrix::Ones(5, 3));
  ab.adjoint(Vector::Ones(6));
  EXPECT_EQ(counter->value, 4u);
}
