#pragma once

#include "mpcert/riccati.hpp"
#include "mpcert/types.hpp"

namespace mpcert {

/// Linear-quadratic optimal control problem over horizon N:
///   min  0.5 sum_{k=0}^{N-1} (z_k'Q z_k + u_k'R u_k) + 0.5 z_N'P z_N
///   s.t. z_{k+1} = F z_k + G u_k,   z_0 = theta,
///        A_z z_k + A_u u_k <= b_s   for k = 0..N-1.
/// There is no terminal state constraint.
template <typename Scalar>
struct OcpSpec {
  MatX<Scalar> F;
  MatX<Scalar> G;
  MatX<Scalar> Q;
  MatX<Scalar> R;
  MatX<Scalar> P;
  int N = 1;
  MatX<Scalar> A_z;
  MatX<Scalar> A_u;
  VecX<Scalar> b_s;

  int nz() const { return static_cast<int>(F.rows()); }
  int nu() const { return static_cast<int>(G.cols()); }
  int nc() const { return static_cast<int>(A_u.rows()); }

  void validate() const {
    const int z = nz(), u = nu();
    if (F.cols() != z) throw DimensionMismatch("OcpSpec: F not square");
    if (G.rows() != z) throw DimensionMismatch("OcpSpec: G rows");
    if (Q.rows() != z || Q.cols() != z) throw DimensionMismatch("OcpSpec: Q shape");
    if (R.rows() != u || R.cols() != u) throw DimensionMismatch("OcpSpec: R shape");
    if (P.rows() != z || P.cols() != z) throw DimensionMismatch("OcpSpec: P shape");
    if (N < 1) throw DimensionMismatch("OcpSpec: N must be >= 1");
    if (A_z.rows() != A_u.rows() || b_s.size() != A_u.rows())
      throw DimensionMismatch("OcpSpec: stage constraint row count");
    if (A_u.rows() > 0 && (A_z.cols() != z || A_u.cols() != u))
      throw DimensionMismatch("OcpSpec: stage constraint column count");
  }

  std::uint64_t checksum() const {
    std::uint64_t h = detail::fnv_seed();
    h = checksum_accumulate(h, F);
    h = checksum_accumulate(h, G);
    h = checksum_accumulate(h, Q);
    h = checksum_accumulate(h, R);
    h = checksum_accumulate(h, P);
    const std::int64_t horizon = N;
    detail::fnv_accumulate(h, &horizon, sizeof(horizon));
    h = checksum_accumulate(h, A_z);
    h = checksum_accumulate(h, A_u);
    h = checksum_accumulate(h, b_s);
    return h;
  }

  /// Fills P with the infinite-horizon Riccati solution for (F, G, Q, R).
  void set_riccati_terminal() { P = solve_dare(F, G, Q, R); }
};

using OcpSpecd = OcpSpec<double>;

/// Double-integrator benchmark problem: position/velocity state sampled at
/// 10 Hz with a symmetric unit input bound.
template <typename Scalar = double>
OcpSpec<Scalar> double_integrator_ocp(int N = 2, Scalar u_bound = Scalar(1)) {
  OcpSpec<Scalar> ocp;
  const Scalar dt = Scalar(0.1);
  ocp.F = (MatX<Scalar>(2, 2) << 1, dt, 0, 1).finished();
  ocp.G = (MatX<Scalar>(2, 1) << Scalar(0.5) * dt * dt, dt).finished();
  ocp.Q = MatX<Scalar>::Identity(2, 2);
  ocp.R = MatX<Scalar>::Identity(1, 1);
  ocp.N = N;
  ocp.A_z = MatX<Scalar>::Zero(2, 2);
  ocp.A_u = (MatX<Scalar>(2, 1) << 1, -1).finished();
  ocp.b_s = VecX<Scalar>::Constant(2, u_bound);
  ocp.set_riccati_terminal();
  return ocp;
}

}  // namespace mpcert
