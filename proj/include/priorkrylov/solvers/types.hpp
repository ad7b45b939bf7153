#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "priorkrylov/priorcond/pinv.hpp"
#include "priorkrylov/regparam/discrepancy.hpp"
#include "priorkrylov/weights/weights.hpp"

namespace priorkrylov {

enum class BasisMode { none, restart, recycle };

struct SolverConfig {
  WeightScheme weights = MmWeights{1.0, 1e-2};
  int max_iter = 150;
  Index h = 5;
  bool reorthogonalize = true;
  double stop_tol = 0.0;
  BasisMode basis_mode = BasisMode::none;
  Index d_min = 15;
  Index d_max = 25;
  DpConfig dp;
  PinvStrategy pinv = PinvStrategy::dense();
  std::uint64_t seed = 0;
};

struct IterationRecord {
  int iter = 0;
  double mu = 0.0;
  Index basis_dim = 0;
  double rre = std::numeric_limits<double>::quiet_NaN();
  double ssim = std::numeric_limits<double>::quiet_NaN();
  double gini = std::numeric_limits<double>::quiet_NaN();
  double kappa = 0.0;
  std::size_t n_A = 0;
  std::size_t n_Psi = 0;
  std::size_t n_Psidag = 0;
  bool dp_root_found = false;
  bool mu_clamped = false;
};

enum class Termination { max_iter, stop_tol, breakdown };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::max_iter: return "max_iter";
    case Termination::stop_tol: return "stop_tol";
    case Termination::breakdown: return "breakdown";
  }
  return "unknown";
}

struct SolveResult {
  Vector x;
  std::vector<IterationRecord> history;
  Termination termination = Termination::max_iter;
  std::string breakdown_reason;
};

/// State exposed to observers after each completed iteration.
struct IterationSnapshot {
  int iter;
  const Vector& x;
  const Vector& weights;
  double mu;
};

/// Per-iteration metric hooks. Any of them may be left empty.
struct Monitor {
  std::function<double(const Vector&)> rre;
  std::function<double(const Vector&)> ssim;
  std::function<void(const IterationSnapshot&)> on_iteration;
};

/// Minimizer of ||F u - g||^2 + mu ||L u||^2 with mu chosen by the DP, where
/// L is square upper triangular and invertible (empty means identity).
struct ProjectedSolution {
  Vector u;
  DpResult dp;
  double kappa = 0.0;
};

/// 2-norm condition number of the stacked matrix [F; sqrt(mu) L].
inline double projected_condition_number(const Matrix& F, const Matrix& L, double mu) {
  const Index d = F.cols();
  const Matrix Lm = L.size() == 0 ? Matrix(Matrix::Identity(d, d)) : L;
  Matrix stacked(F.rows() + Lm.rows(), d);
  stacked << F, std::sqrt(mu) * Lm;
  const Vector s = thin_svd(stacked).s;
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

inline ProjectedSolution solve_projected(const Matrix& F, const Vector& g, double offset,
                                         const Matrix& L, double target, const DpConfig& dp) {
  ProjectedSolution out;
  Matrix Ft = F;
  if (L.size() != 0) {
    Ft = L.transpose().triangularView<Eigen::Lower>().solve(F.transpose()).transpose();
  }
  DpProblem problem(DpInput{Ft, g, offset, target});
  out.dp = dp_select_mu(problem, dp.mu_min, dp.mu_max, dp.fallback);
  Vector t = problem.solve(out.dp.mu);
  out.u = L.size() != 0 ? Vector(L.triangularView<Eigen::Upper>().solve(t)) : t;
  out.kappa = projected_condition_number(F, L, out.dp.mu);
  return out;
}

}  // namespace priorkrylov
