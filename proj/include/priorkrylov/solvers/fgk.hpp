#pragma once

#include "priorkrylov/solvers/psgks.hpp"

namespace priorkrylov {

/// Flexible Golub-Kahan hybrid method with iteration-dependent
/// preconditioning by the oblique pseudoinverse of the weighted transform.
/// The columns z_l = (Psi_l)_A^dagger ((Psi_l)_A^dagger)^T v_l are not
/// orthogonal; A Z_l = U_{l+1} M_l with M_l upper Hessenberg.
inline SolveResult fgk_solve(const LinearOperator& A_in, const SparsifyingTransform& psi, const Vector& b,
                             const SolverConfig& cfg, const Monitor& monitor = {}) {
  detail::PriorcondContext ctx(A_in, psi, b, cfg.pinv);
  const LinearOperator Psi = psi.as_operator();
  detail::Recorder rec{monitor, ctx.A, Psi, *ctx.pinv_count};
  const LinearOperator& A = ctx.A;
  const double target = dp_target(cfg.dp.tau, A.rows());
  const Vector& b_bar = ctx.split.b_bar;
  const double beta1 = b_bar.norm();
  if (!(beta1 > 0.0)) throw ZeroSeed("fgk_solve: b_bar is zero");

  const Index n_max = cfg.max_iter;
  Matrix U(A.rows(), n_max + 1);
  Matrix V(A.cols(), n_max);
  Matrix Z(A.cols(), n_max);
  Matrix PsiZ(psi.rows, n_max);
  Matrix M = Matrix::Zero(n_max + 1, n_max);
  U.col(0) = b_bar / beta1;

  Vector x = ctx.split.x_ker;
  Vector psi_x = Vector::Zero(psi.rows);
  double mu_prev = 1.0;
  SolveResult result;
  for (Index ell = 1; ell <= n_max; ++ell) {
    const Index j = ell - 1;
    try {
      Vector v = A.adjoint(Vector(U.col(j)));
      const double vb = v.norm();
      project_out(V.leftCols(j), v, 2);
      const double vn = v.norm();
      if (!(vb > 0.0) || vn < 1e-13 * vb) throw FgkBreakdown("fgk: v direction lost");
      V.col(j) = v / vn;

      const Vector w = compute_weights(cfg.weights, psi_x, 1.0 / mu_prev);
      const ObliquePinv obliq = ctx.oblique(w);
      const Vector z = obliq.apply(obliq.adjoint(Matrix(V.col(j))));

      Vector u = A.apply(z);
      const double ub = u.norm();
      const Vector coeff = project_out(U.leftCols(ell), u, 2);
      const double un = u.norm();
      if (!(ub > 0.0) || un < 1e-13 * ub) throw FgkBreakdown("fgk: u direction lost");
      U.col(ell) = u / un;
      M.col(j).head(ell) = coeff;
      M(ell, j) = un;
      Z.col(j) = z;
      PsiZ.col(j) = Psi.apply(z);

      const QrFactors qp = thin_qr(w.asDiagonal() * PsiZ.leftCols(ell));
      Vector g = Vector::Zero(ell + 1);
      g(0) = beta1;
      const ProjectedSolution sol =
          solve_projected(M.topLeftCorner(ell + 1, ell), g, 0.0, qp.R, target, cfg.dp);
      const Vector x_new = ctx.split.x_ker + Z.leftCols(ell) * sol.u;
      psi_x = PsiZ.leftCols(ell) * sol.u;
      result.history.push_back(rec.make(static_cast<int>(ell), sol, ell, x_new, psi_x));
      if (monitor.on_iteration) monitor.on_iteration({static_cast<int>(ell), x_new, w, sol.dp.mu});
      const bool converged = detail::relative_change_below(x_new, x, cfg.stop_tol);
      x = x_new;
      mu_prev = sol.dp.mu;
      if (converged) {
        result.termination = Termination::stop_tol;
        break;
      }
    } catch (const FgkBreakdown& e) {
      result.termination = Termination::breakdown;
      result.breakdown_reason = e.what();
      break;
    }
  }
  result.x = x;
  return result;
}

}  // namespace priorkrylov
