#pragma once

#include "priorkrylov/core/dense.hpp"
#include "priorkrylov/core/linear_operator.hpp"
#include "priorkrylov/solvers/basis.hpp"
#include "priorkrylov/solvers/recorder.hpp"
#include "priorkrylov/transforms/sparsifying.hpp"

namespace priorkrylov {

namespace detail {

// Column-updated QR of A V. Once the columns of A V span the whole data
// space, further columns only extend R (which becomes trapezoidal).
inline void append_column_saturating(QrFactors& f, const Vector& c) {
  const Index n = f.R.cols();
  Vector t = c;
  const Vector coeff = project_out(f.Q, t, 2);
  const double rho = t.norm();
  const bool grow = f.Q.cols() < f.Q.rows() && rho >= 1e-12 * c.norm() && rho > 0.0;
  const Index k = f.Q.cols() + (grow ? 1 : 0);
  Matrix R = Matrix::Zero(k, n + 1);
  R.topLeftCorner(f.R.rows(), n) = f.R;
  R.col(n).head(coeff.size()) = coeff;
  if (grow) {
    R(k - 1, n) = rho;
    Matrix Q(f.Q.rows(), k);
    Q << f.Q, t / rho;
    f.Q = std::move(Q);
  }
  f.R = std::move(R);
}

}  // namespace detail

/// Sparsity-promoting generalized Krylov subspace IRLS on the original
/// variables. With EqualWeights this is plain GKS.
inline SolveResult sgks_solve(const LinearOperator& A_in, const SparsifyingTransform& psi, const Vector& b,
                              const Vector& x0_in, const SolverConfig& cfg, const Monitor& monitor = {}) {
  const LinearOperator A = A_in.with_fresh_counter();
  const LinearOperator Psi = psi.as_operator();
  MatvecCounter no_pinv;
  detail::Recorder rec{monitor, A, Psi, no_pinv};
  const double target = dp_target(cfg.dp.tau, A.rows());
  const bool capped = cfg.basis_mode != BasisMode::none;

  Vector x = x0_in.size() == 0 ? Vector(Vector::Zero(A.cols())) : x0_in;
  Matrix V = krylov_basis([&](const Vector& v) { return A.adjoint(A.apply(v)); }, A.adjoint(b), cfg.h);
  if (x.squaredNorm() > 0.0) {
    Vector t = x;
    project_out(V, t, 2);
    if (t.norm() >= 1e-12 * x.norm()) {
      V.conservativeResize(Eigen::NoChange, V.cols() + 1);
      V.col(V.cols() - 1) = t / t.norm();
    }
  }
  Matrix AV = A.apply_block(V);
  QrFactors qa = thin_qr(AV);
  Matrix PsiV = Psi.apply_block(V);
  Vector psi_x = Psi.apply(x);
  double mu_prev = 1.0;
  const double bnorm2 = b.squaredNorm();

  SolveResult result;
  Vector w;
  for (int ell = 0; ell < cfg.max_iter; ++ell) {
    w = compute_weights(cfg.weights, psi_x, 1.0 / mu_prev);
    const QrFactors qp = thin_qr(w.asDiagonal() * PsiV);
    const Vector g = qa.Q.transpose() * b;
    const ProjectedSolution sol = solve_projected(qa.R, g, bnorm2 - g.squaredNorm(), qp.R, target, cfg.dp);
    const double mu = sol.dp.mu;
    const Vector x_new = V * sol.u;
    psi_x = PsiV * sol.u;
    const Index dim = V.cols();
    result.history.push_back(rec.make(ell + 1, sol, dim, x_new, psi_x));
    if (monitor.on_iteration) monitor.on_iteration({ell + 1, x_new, w, mu});
    const bool converged = detail::relative_change_below(x_new, x, cfg.stop_tol);
    x = x_new;
    mu_prev = mu;
    if (converged) {
      result.termination = Termination::stop_tol;
      break;
    }
    if (ell + 1 == cfg.max_iter) break;

    if (capped && dim >= cfg.d_max) {
      Matrix C;
      if (cfg.basis_mode == BasisMode::restart) {
        const double n = sol.u.norm();
        C = n > 0.0 ? Matrix(sol.u / n) : Matrix(Matrix::Identity(dim, 1));
      } else {
        Matrix H(qa.R.rows() + qp.R.rows(), dim);
        H << qa.R, std::sqrt(mu) * qp.R;
        C = compress_coefficients(H, sol.u, cfg.d_min);
      }
      V = V * C;
      AV = AV * C;
      PsiV = PsiV * C;
      qa = thin_qr(AV);
      continue;
    }

    const Vector AVu = AV * sol.u;
    Vector r = A.adjoint(AVu - b) + mu * Psi.adjoint(w.cwiseAbs2().cwiseProduct(psi_x));
    Vector v;
    try {
      v = detail::new_direction(V, std::move(r), cfg.reorthogonalize);
    } catch (const BasisStagnation& e) {
      result.termination = Termination::breakdown;
      result.breakdown_reason = e.what();
      break;
    }
    V.conservativeResize(Eigen::NoChange, dim + 1);
    V.col(dim) = v;
    const Vector av = A.apply(v);
    AV.conservativeResize(Eigen::NoChange, dim + 1);
    AV.col(dim) = av;
    detail::append_column_saturating(qa, av);
    const Vector pv = Psi.apply(v);
    PsiV.conservativeResize(Eigen::NoChange, dim + 1);
    PsiV.col(dim) = pv;
  }
  result.x = x;
  return result;
}

}  // namespace priorkrylov
