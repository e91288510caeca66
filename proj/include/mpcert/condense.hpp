#pragma once

#include <vector>

#include "mpcert/dual_active_set.hpp"
#include "mpcert/ocp.hpp"
#include "mpcert/qp.hpp"
#include "mpcert/types.hpp"

namespace mpcert {

/// QP family parametrized by theta:
///   min  0.5 x'Hx + (f0 + F_theta theta)'x
///   s.t. Ax <= b0 + W_theta theta.
template <typename Scalar>
struct ParametricQp {
  MatX<Scalar> H;
  VecX<Scalar> f0;
  MatX<Scalar> F_theta;
  MatX<Scalar> A;
  VecX<Scalar> b0;
  MatX<Scalar> W_theta;
  /// Checksum of the problem family (the source OCP when condensed).
  std::uint64_t source_checksum = 0;

  int n() const { return static_cast<int>(H.rows()); }
  int m() const { return static_cast<int>(A.rows()); }
  int d() const { return static_cast<int>(F_theta.cols()); }

  void validate() const {
    if (H.rows() != H.cols()) throw DimensionMismatch("ParametricQp: H not square");
    if (f0.size() != H.rows()) throw DimensionMismatch("ParametricQp: f0 size");
    if (F_theta.rows() != H.rows()) throw DimensionMismatch("ParametricQp: F_theta rows");
    if (A.rows() > 0 && A.cols() != H.rows()) throw DimensionMismatch("ParametricQp: A cols");
    if (b0.size() != A.rows()) throw DimensionMismatch("ParametricQp: b0 size");
    if (W_theta.rows() != A.rows()) throw DimensionMismatch("ParametricQp: W_theta rows");
    if (W_theta.cols() != F_theta.cols()) throw DimensionMismatch("ParametricQp: W_theta cols");
  }

  std::uint64_t checksum() const {
    std::uint64_t h = detail::fnv_seed();
    h = checksum_accumulate(h, H);
    h = checksum_accumulate(h, f0);
    h = checksum_accumulate(h, F_theta);
    h = checksum_accumulate(h, A);
    h = checksum_accumulate(h, b0);
    h = checksum_accumulate(h, W_theta);
    return h;
  }
};

using ParametricQpd = ParametricQp<double>;

/// Fixes the family checksum for hand-built members.
template <typename Scalar>
ParametricQp<Scalar> finalize_family(ParametricQp<Scalar> pqp) {
  pqp.validate();
  if (pqp.source_checksum == 0) pqp.source_checksum = pqp.checksum();
  return pqp;
}

/// Condenses an OCP into a parametric QP in the stacked input vector
/// x = [u_0; ...; u_{N-1}] with z_0 = theta eliminated through the dynamics.
/// The Hessian is symmetrized exactly; the parameter enters only the linear
/// cost and the constraint offsets.
template <typename Scalar>
ParametricQp<Scalar> condense(const OcpSpec<Scalar>& ocp) {
  ocp.validate();
  const int nz = ocp.nz(), nu = ocp.nu(), nc = ocp.nc(), N = ocp.N;
  const int n = N * nu;

  // Powers of F: phi[k] = F^k for k = 0..N.
  std::vector<MatX<Scalar>> phi(static_cast<std::size_t>(N) + 1);
  phi[0] = MatX<Scalar>::Identity(nz, nz);
  for (int k = 1; k <= N; ++k) phi[static_cast<std::size_t>(k)] = ocp.F * phi[static_cast<std::size_t>(k - 1)];

  // Stacked prediction of [z_1; ...; z_N] = Phi theta + Gamma x.
  MatX<Scalar> Phi(N * nz, nz);
  MatX<Scalar> Gamma = MatX<Scalar>::Zero(N * nz, n);
  for (int k = 1; k <= N; ++k) {
    Phi.middleRows((k - 1) * nz, nz) = phi[static_cast<std::size_t>(k)];
    for (int j = 0; j < k; ++j)
      Gamma.block((k - 1) * nz, j * nu, nz, nu) = phi[static_cast<std::size_t>(k - 1 - j)] * ocp.G;
  }

  // Q-bar = blkdiag(Q, ..., Q, P) over z_1..z_N; R-bar = blkdiag(R, ..., R).
  MatX<Scalar> QbarGamma(N * nz, n);
  MatX<Scalar> QbarPhi(N * nz, nz);
  for (int k = 1; k <= N; ++k) {
    const MatX<Scalar>& Wk = (k == N) ? ocp.P : ocp.Q;
    QbarGamma.middleRows((k - 1) * nz, nz) = Wk * Gamma.middleRows((k - 1) * nz, nz);
    QbarPhi.middleRows((k - 1) * nz, nz) = Wk * Phi.middleRows((k - 1) * nz, nz);
  }

  ParametricQp<Scalar> pqp;
  pqp.H = Gamma.transpose() * QbarGamma;
  for (int j = 0; j < N; ++j) pqp.H.block(j * nu, j * nu, nu, nu) += ocp.R;
  pqp.H = Scalar(0.5) * (pqp.H + pqp.H.transpose()).eval();
  pqp.f0 = VecX<Scalar>::Zero(n);
  pqp.F_theta = Gamma.transpose() * QbarPhi;

  // Stage constraints A_z z_k + A_u u_k <= b_s; z_k substituted through the
  // prediction, so theta enters the right-hand side with weight -A_z F^k.
  const int m = N * nc;
  pqp.A = MatX<Scalar>::Zero(m, n);
  pqp.b0 = VecX<Scalar>(m);
  pqp.W_theta = MatX<Scalar>::Zero(m, nz);
  for (int k = 0; k < N; ++k) {
    auto rows = Eigen::seqN(k * nc, nc);
    if (k > 0) pqp.A(rows, Eigen::all) = ocp.A_z * Gamma.middleRows((k - 1) * nz, nz);
    pqp.A.block(k * nc, k * nu, nc, nu) += ocp.A_u;
    pqp.b0.segment(k * nc, nc) = ocp.b_s;
    pqp.W_theta.middleRows(k * nc, nc) = -ocp.A_z * phi[static_cast<std::size_t>(k)];
  }

  pqp.source_checksum = ocp.checksum();
  pqp.validate();
  return pqp;
}

/// Member of the family at a concrete parameter.
template <typename Scalar>
DenseQp<Scalar> instantiate(const ParametricQp<Scalar>& pqp, const VecX<Scalar>& theta) {
  pqp.validate();
  if (theta.size() != pqp.d()) throw DimensionMismatch("instantiate: theta size");
  DenseQp<Scalar> qp;
  qp.H = pqp.H;
  qp.f = pqp.f0 + pqp.F_theta * theta;
  qp.A = pqp.A;
  qp.b = pqp.b0 + pqp.W_theta * theta;
  return qp;
}

/// Restricts the family to a parameter subspace: coordinates in dims stay
/// free, all others are pinned to the entries of fixed.
template <typename Scalar>
ParametricQp<Scalar> slice(const ParametricQp<Scalar>& pqp, const std::vector<int>& dims,
                           const VecX<Scalar>& fixed) {
  pqp.validate();
  if (fixed.size() != pqp.d()) throw DimensionMismatch("slice: fixed size");
  for (int c : dims)
    if (c < 0 || c >= pqp.d()) throw DimensionMismatch("slice: dim out of range");

  VecX<Scalar> base = fixed;
  for (int c : dims) base(c) = Scalar(0);

  ParametricQp<Scalar> out;
  out.H = pqp.H;
  out.f0 = pqp.f0 + pqp.F_theta * base;
  out.F_theta = pqp.F_theta(Eigen::all, dims);
  out.A = pqp.A;
  out.b0 = pqp.b0 + pqp.W_theta * base;
  out.W_theta = pqp.W_theta(Eigen::all, dims);
  out.source_checksum = 0;
  return finalize_family(out);
}

/// One receding-horizon control step: solves the member at theta and returns
/// the first input block.  The trace carries the family checksum and theta
/// so baseline comparisons can verify they refer to the same problem.
template <typename Scalar>
struct MpcStep {
  VecX<Scalar> u0;
  SolveTrace<Scalar> trace;
};

template <typename Scalar>
MpcStep<Scalar> mpc_step(const ParametricQp<Scalar>& pqp, const VecX<Scalar>& theta, int nu,
                         const SolverConfig<Scalar>& cfg = {}) {
  DenseQp<Scalar> qp = instantiate(pqp, theta);
  MpcStep<Scalar> step;
  step.trace = dual_active_set_solve(qp, cfg);
  step.trace.problem_checksum = pqp.source_checksum;
  step.trace.theta = theta;
  step.u0 = step.trace.x_star.head(nu);
  return step;
}

}  // namespace mpcert
