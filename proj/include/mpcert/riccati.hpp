#pragma once

#include "mpcert/types.hpp"

namespace mpcert {

/// Solves the discrete algebraic Riccati equation
///   P = Q + F'PF - F'PG (R + G'PG)^{-1} G'PF
/// by the structure-preserving doubling iteration.  Throws NumericalFailure
/// when the iteration does not converge (e.g. unstabilizable pair) or the
/// fixed-point residual check fails.
template <typename Scalar>
MatX<Scalar> solve_dare(const MatX<Scalar>& F, const MatX<Scalar>& G, const MatX<Scalar>& Q,
                        const MatX<Scalar>& R) {
  const int n = static_cast<int>(F.rows());
  if (F.cols() != n || G.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != G.cols() || R.cols() != G.cols())
    throw DimensionMismatch("solve_dare: inconsistent dimensions");

  Eigen::LLT<MatX<Scalar>> llt_r(R);
  if (llt_r.info() != Eigen::Success)
    throw NumericalFailure("solve_dare: R is not positive definite");

  MatX<Scalar> Ak = F;
  MatX<Scalar> Gk = G * llt_r.solve(G.transpose());
  MatX<Scalar> Hk = Q;
  const MatX<Scalar> I = MatX<Scalar>::Identity(n, n);

  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    // W = I + G_k H_k; all three recurrences share W^{-1}.
    Eigen::PartialPivLU<MatX<Scalar>> lu(I + Gk * Hk);
    MatX<Scalar> W_inv_Ak = lu.solve(Ak);
    MatX<Scalar> W_inv_Gk = lu.solve(Gk);
    MatX<Scalar> Hk1 = Hk + Ak.transpose() * Hk * W_inv_Ak;
    MatX<Scalar> Gk1 = Gk + Ak * W_inv_Gk * Ak.transpose();
    MatX<Scalar> Ak1 = Ak * W_inv_Ak;
    if (!Hk1.allFinite() || !Gk1.allFinite() || !Ak1.allFinite())
      throw NumericalFailure("solve_dare: doubling iteration diverged");
    const Scalar diff = (Hk1 - Hk).template lpNorm<Eigen::Infinity>();
    const Scalar scale = std::max(Hk1.template lpNorm<Eigen::Infinity>(), Scalar(1));
    Ak = std::move(Ak1);
    Gk = std::move(Gk1);
    Hk = std::move(Hk1);
    if (diff <= Scalar(1e-15) * scale) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericalFailure("solve_dare: doubling iteration did not converge");

  MatX<Scalar> P = Scalar(0.5) * (Hk + Hk.transpose());
  MatX<Scalar> S = R + G.transpose() * P * G;
  MatX<Scalar> residual = Q + F.transpose() * P * F -
                          F.transpose() * P * G * S.ldlt().solve(G.transpose() * P * F) - P;
  const Scalar res = residual.template lpNorm<Eigen::Infinity>();
  const Scalar pscale = std::max(P.template lpNorm<Eigen::Infinity>(), Scalar(1));
  if (!(res <= Scalar(1e-8) * pscale))
    throw NumericalFailure("solve_dare: fixed-point residual too large");
  return P;
}

/// Infinite-horizon LQR gain K with u = -Kx for the given terminal solution.
template <typename Scalar>
MatX<Scalar> lqr_gain(const MatX<Scalar>& F, const MatX<Scalar>& G, const MatX<Scalar>& R,
                      const MatX<Scalar>& P) {
  MatX<Scalar> S = R + G.transpose() * P * G;
  return S.ldlt().solve(G.transpose() * P * F);
}

}  // namespace mpcert
