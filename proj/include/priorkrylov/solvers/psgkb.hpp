#pragma once

#include "priorkrylov/solvers/psgks.hpp"

namespace priorkrylov {

struct GkbFactors {
  Matrix U;  // M x (k+1) or M x k after a breakdown in u
  Matrix V;  // K x k
  Matrix B;  // U.cols() x V.cols(), lower bidiagonal up to roundoff
  bool truncated = false;
};

/// Golub-Kahan bidiagonalization of A_bar seeded at b_bar / ||b_bar||, with
/// full reorthogonalization. A_bar V = U B holds with B read off the
/// orthogonalization coefficients.
inline GkbFactors golub_kahan(const Abar& ab, const Vector& b_bar, Index steps) {
  const double beta1 = b_bar.norm();
  if (!(beta1 > 0.0)) throw ZeroSeed("golub_kahan: zero data");
  const Index m = ab.rows();
  GkbFactors f;
  f.U = Matrix(m, steps + 1);
  f.V = Matrix(ab.cols(), steps);
  f.B = Matrix::Zero(steps + 1, steps);
  f.U.col(0) = b_bar / beta1;
  Index nu = 1;
  Index nv = 0;
  for (Index j = 0; j < steps; ++j) {
    Vector v = ab.adjoint(Matrix(f.U.col(j)));
    const double vb = v.norm();
    project_out(f.V.leftCols(nv), v, 2);
    const double alpha = v.norm();
    if (!(vb > 0.0) || alpha < 1e-13 * vb) {
      f.truncated = true;
      break;
    }
    f.V.col(j) = v / alpha;
    nv = j + 1;
    Vector u = ab.apply(Matrix(f.V.col(j)));
    const double ub = u.norm();
    const Vector coeff = project_out(f.U.leftCols(nu), u, 2);
    f.B.col(j).head(nu) = coeff;
    const double beta = u.norm();
    if (!(ub > 0.0) || beta < 1e-13 * ub) {
      f.truncated = true;
      break;
    }
    f.U.col(j + 1) = u / beta;
    f.B(j + 1, j) = beta;
    nu = j + 2;
  }
  f.U.conservativeResize(Eigen::NoChange, nu);
  f.V.conservativeResize(Eigen::NoChange, nv);
  f.B = Matrix(f.B.topLeftCorner(nu, nv));
  return f;
}

/// Priorconditioned GKB hybrid method: at iteration l the bidiagonalization
/// of the current A_bar is rebuilt from scratch with l steps.
inline SolveResult psgkb_solve(const LinearOperator& A_in, const SparsifyingTransform& psi, const Vector& b,
                               const SolverConfig& cfg, const Monitor& monitor = {}) {
  detail::PriorcondContext ctx(A_in, psi, b, cfg.pinv);
  const LinearOperator Psi = psi.as_operator();
  detail::Recorder rec{monitor, ctx.A, Psi, *ctx.pinv_count};
  const double target = dp_target(cfg.dp.tau, ctx.A.rows());
  const Vector& b_bar = ctx.split.b_bar;
  const double beta1 = b_bar.norm();
  if (!(beta1 > 0.0)) throw ZeroSeed("psgkb_solve: b_bar is zero");

  Vector x = Vector::Zero(ctx.A.cols());
  Vector psi_x = Vector::Zero(psi.rows);
  double mu_prev = 1.0;
  SolveResult result;
  for (int ell = 1; ell <= cfg.max_iter; ++ell) {
    const Vector w = compute_weights(cfg.weights, psi_x, 1.0 / mu_prev);
    const ObliquePinv obliq = ctx.oblique(w);
    const Abar ab = abar(obliq);
    const GkbFactors gkb = golub_kahan(ab, b_bar, ell);
    Vector g = Vector::Zero(gkb.B.rows());
    g(0) = beta1;
    const ProjectedSolution sol = solve_projected(gkb.B, g, 0.0, Matrix(), target, cfg.dp);
    const Vector z = gkb.V * sol.u;
    const Vector x_new = Vector(obliq.apply(z)) + ctx.split.x_ker;
    psi_x = ctx.exact_inverse() ? Vector(z.cwiseQuotient(w)) : Psi.apply(x_new);
    result.history.push_back(rec.make(ell, sol, gkb.V.cols(), x_new, psi_x));
    if (monitor.on_iteration) monitor.on_iteration({ell, x_new, w, sol.dp.mu});
    const bool converged = detail::relative_change_below(x_new, x, cfg.stop_tol);
    x = x_new;
    mu_prev = sol.dp.mu;
    if (converged) {
      result.termination = Termination::stop_tol;
      break;
    }
  }
  result.x = x;
  return result;
}

}  // namespace priorkrylov
