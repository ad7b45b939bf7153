#pragma once

#include "priorkrylov/core/linear_operator.hpp"
#include "priorkrylov/metrics/metrics.hpp"
#include "priorkrylov/solvers/types.hpp"

namespace priorkrylov::detail {

// Builds iteration records from the live counters of one run.
struct Recorder {
  const Monitor& monitor;
  const LinearOperator& A;
  const LinearOperator& Psi;
  const MatvecCounter& pinv;

  IterationRecord make(int iter, const ProjectedSolution& sol, Index dim, const Vector& x,
                       const Vector& psi_x) const {
    IterationRecord r;
    r.iter = iter;
    r.mu = sol.dp.mu;
    r.basis_dim = dim;
    r.kappa = sol.kappa;
    r.dp_root_found = sol.dp.root_found;
    r.mu_clamped = sol.dp.clamped;
    if (monitor.rre) r.rre = monitor.rre(x);
    if (monitor.ssim) r.ssim = monitor.ssim(x);
    r.gini = psi_x.cwiseAbs().sum() > 0.0 ? gini_index(psi_x) : 0.0;
    r.n_A = A.count();
    r.n_Psi = Psi.count();
    r.n_Psidag = pinv.value;
    return r;
  }
};

inline bool relative_change_below(const Vector& x_new, const Vector& x_old, double tol) {
  if (!(tol > 0.0)) return false;
  return (x_new - x_old).norm() / std::max(x_old.norm(), 1e-30) < tol;
}

// Orthogonalizes r against V (twice when reorth is on) and normalizes it.
// Throws BasisStagnation when no new direction survives.
inline Vector new_direction(const Matrix& V, Vector r, bool reorth) {
  const double before = r.norm();
  if (reorth) project_out(V, r, 2);
  const double after = r.norm();
  if (!(before > 0.0) || after < 1e-13 * before) {
    throw BasisStagnation("basis expansion stagnated");
  }
  return r / after;
}

}  // namespace priorkrylov::detail
