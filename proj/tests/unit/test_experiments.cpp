// Full-size deblurring runs (N = 1000, M = 50, 3% noise, 150 iterations).
// Each solve takes a second or two.

#include <gtest/gtest.h>

#include "priorkrylov/io/config.hpp"
#include "priorkrylov/priorkrylov.hpp"

namespace pk = priorkrylov;
using pk::Vector;

namespace {

pk::SolverConfig preset(const std::string& method) {
  pk::SolverConfig cfg;
  cfg.max_iter = 150;
  cfg.weights = priorkrylov::io::default_weights(method, "dct1d").first;
  return cfg;
}

pk::SolveResult run(const std::string& method, const pk::SolverConfig& cfg, const pk::ProblemInstance& p) {
  const Vector x0 = Vector::Zero(p.A.cols());
  if (method == "s-gks") return pk::sgks_solve(p.A, p.psi, p.b, x0, cfg, p.monitor());
  if (method == "ps-gks") return pk::psgks_solve(p.A, p.psi, p.b, x0, cfg, p.monitor());
  if (method == "ps-gkb") return pk::psgkb_solve(p.A, p.psi, p.b, cfg, p.monitor());
  return pk::fgk_solve(p.A, p.psi, p.b, cfg, p.monitor());
}

}  // namespace

class DeblurSeeds : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(DeblurSeeds, SgksFinalErrorRange) {
  const auto p = pk::make_1d_dct_problem(1000, 50, 0.03, GetParam());
  const double r = run("s-gks", preset("s-gks"), p).history.back().rre;
  EXPECT_GE(r, 0.06);
  EXPECT_LE(r, 0.10);
}

TEST_P(DeblurSeeds, PsgksBeatsSgks) {
  const auto p = pk::make_1d_dct_problem(1000, 50, 0.03, GetParam());
  const double ps = run("ps-gks", preset("ps-gks"), p).history.back().rre;
  const double s = run("s-gks", preset("s-gks"), p).history.back().rre;
  EXPECT_LE(ps, 0.08);
  EXPECT_LT(ps, s);
}

INSTANTIATE_TEST_SUITE_P(Seeds, DeblurSeeds, ::testing::Values(0, 1, 2, 3, 4));

TEST(Deblur, PsgksIasIsSparse) {
  const auto p = pk::make_1d_dct_problem(1000, 50, 0.03, 0);
  auto cfg = preset("ps-gks");
  cfg.weights = pk::IasWeights{-1.0, 1.0};
  EXPECT_GE(run("ps-gks", cfg, p).history.back().gini, 0.98);
}

TEST(Deblur, RecycledPsgksMatchesFull) {
  const auto p = pk::make_1d_dct_problem(1000, 50, 0.03, 0);
  auto cfg = preset("ps-gks");
  const double full = run("ps-gks", cfg, p).history.back().rre;
  cfg.basis_mode = pk::BasisMode::recycle;
  cfg.d_min = 15;
  cfg.d_max = 25;
  EXPECT_NEAR(run("ps-gks", cfg, p).history.back().rre, full, 0.02);
}

TEST(Deblur, PsgkbFollowsPsgks) {
  const auto p = pk::make_1d_dct_problem(1000, 50, 0.03, 0);
  const auto a = run("ps-gks", preset("ps-gks"), p);
  const auto b = run("ps-gkb", preset("ps-gks"), p);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 19; i < a.history.size(); ++i) {
    EXPECT_NEAR(b.history[i].rre, a.history[i].rre, 0.005) << "iteration " << i + 1;
  }
}

TEST(Deblur, FgkBreaksDownAtOperatorRank) {
  const auto p = pk::make_1d_dct_problem(1000, 50, 0.03, 0);
  const auto res = run("fgk", preset("fgk"), p);
  EXPECT_EQ(res.termination, pk::Termination::breakdown);
  ASSERT_FALSE(res.history.empty());
  EXPECT_EQ(res.history.back().iter, 49);
}
