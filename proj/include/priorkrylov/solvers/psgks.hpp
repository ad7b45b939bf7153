#pragma once

#include "priorkrylov/core/dense.hpp"
#include "priorkrylov/priorcond/oblique.hpp"
#include "priorkrylov/solvers/basis.hpp"
#include "priorkrylov/solvers/recorder.hpp"

namespace priorkrylov {

/// V_0 = K_h(A_bar^T A_bar, A_bar^T b_bar), augmented with z0 = Psi_0 x0
/// when x0 is nonzero.
inline Matrix initial_subspace_psgks(const Abar& ab, const Vector& b_bar, Index h, const Vector& z0) {
  const bool have_z0 = z0.size() > 0 && z0.squaredNorm() > 0.0;
  if (b_bar.squaredNorm() == 0.0) {
    if (!have_z0) throw ZeroSeed("initial_subspace_psgks: b_bar and x0 are both zero");
    return z0 / z0.norm();
  }
  const Vector seed = ab.adjoint(b_bar);
  Matrix V = krylov_basis([&](const Vector& v) -> Vector { return ab.adjoint(ab.apply(v)); }, seed, h);
  if (have_z0) {
    Vector t = z0;
    project_out(V, t, 2);
    if (t.norm() >= 1e-12 * z0.norm()) {
      V.conservativeResize(Eigen::NoChange, V.cols() + 1);
      V.col(V.cols() - 1) = t / t.norm();
    }
  }
  return V;
}

namespace detail {

// Everything a priorconditioned solver needs to rebuild A_bar per iteration.
struct PriorcondContext {
  LinearOperator A;
  const SparsifyingTransform& psi;
  KernelSplit split;
  PinvStrategy strategy;
  std::shared_ptr<MatvecCounter> pinv_count = std::make_shared<MatvecCounter>();
  std::shared_ptr<const DctPreconditioner> precond;

  PriorcondContext(const LinearOperator& A_in, const SparsifyingTransform& p, const Vector& b,
                   const PinvStrategy& s)
      : A(A_in.with_fresh_counter()), psi(p), strategy(s) {
    split = x_kernel(A, psi.kernel, b);
    if (s.kind == PinvStrategy::Kind::PcgDct) precond = std::make_shared<const DctPreconditioner>(psi);
  }

  ObliquePinv oblique(const Vector& w) const {
    return oblique_pinv(psi, w, strategy, A, split.cache, pinv_count, precond);
  }

  // Psi x for x = (Psi_l)_A^dagger z. With an exactly inverted square Psi
  // this is W^{-1} z and needs no product with Psi.
  bool exact_inverse() const { return psi.invertible() && strategy.kind == PinvStrategy::Kind::Dense; }
};

}  // namespace detail

/// Priorconditioned sparsity-promoting GKS: the generalized Krylov subspace
/// lives in the transformed variables z = Psi_l x, where the penalty is the
/// identity.
inline SolveResult psgks_solve(const LinearOperator& A_in, const SparsifyingTransform& psi, const Vector& b,
                               const Vector& x0_in, const SolverConfig& cfg, const Monitor& monitor = {}) {
  detail::PriorcondContext ctx(A_in, psi, b, cfg.pinv);
  const LinearOperator Psi = psi.as_operator();
  detail::Recorder rec{monitor, ctx.A, Psi, *ctx.pinv_count};
  const double target = dp_target(cfg.dp.tau, ctx.A.rows());
  const bool capped = cfg.basis_mode != BasisMode::none;
  const Vector& b_bar = ctx.split.b_bar;
  const Vector& x_ker = ctx.split.x_ker;
  const double bbar2 = b_bar.squaredNorm();

  Vector x = x0_in.size() == 0 ? Vector(Vector::Zero(ctx.A.cols())) : x0_in;
  Vector psi_x = Psi.apply(x);
  double mu_prev = 1.0;
  Vector w = compute_weights(cfg.weights, psi_x, 1.0 / mu_prev);
  Matrix V;
  {
    const Abar ab0 = abar(ctx.oblique(w));
    V = initial_subspace_psgks(ab0, b_bar, cfg.h, w.cwiseProduct(psi_x));
  }

  SolveResult result;
  for (int ell = 0; ell < cfg.max_iter; ++ell) {
    if (ell > 0) w = compute_weights(cfg.weights, psi_x, 1.0 / mu_prev);
    const ObliquePinv obliq = ctx.oblique(w);
    const Abar ab = abar(obliq);
    const Matrix AbV = ab.apply(V);
    const QrFactors qr = thin_qr(AbV);
    const Vector g = qr.Q.transpose() * b_bar;
    const ProjectedSolution sol = solve_projected(qr.R, g, bbar2 - g.squaredNorm(), Matrix(), target, cfg.dp);
    const double mu = sol.dp.mu;
    const Vector z = V * sol.u;
    const Vector x_new = Vector(obliq.apply(z)) + x_ker;
    psi_x = ctx.exact_inverse() ? Vector(z.cwiseQuotient(w)) : Psi.apply(x_new);
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
      if (cfg.basis_mode == BasisMode::restart) {
        const double n = z.norm();
        V = n > 0.0 ? Matrix(z / n) : Matrix(V.col(0));
      } else {
        V = compress_basis_tsvd(V, qr.R, mu, z, cfg.d_min);
      }
      continue;
    }

    Vector r = Vector(ab.adjoint(AbV * sol.u - b_bar)) + mu * z;
    try {
      const Vector v = detail::new_direction(V, std::move(r), cfg.reorthogonalize);
      V.conservativeResize(Eigen::NoChange, dim + 1);
      V.col(dim) = v;
    } catch (const BasisStagnation& e) {
      result.termination = Termination::breakdown;
      result.breakdown_reason = e.what();
      break;
    }
  }
  result.x = x;
  return result;
}

}  // namespace priorkrylov
