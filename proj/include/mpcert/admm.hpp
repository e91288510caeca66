#pragma once

#include <limits>
#include <vector>

#include "mpcert/dual_active_set.hpp"
#include "mpcert/ocp.hpp"
#include "mpcert/types.hpp"

namespace mpcert {

/// Thrown when traces from different problems (or parameters) are compared.
struct MismatchedProblem : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Precomputed operator-splitting workspace for an input-box OCP: Riccati
/// backward-pass gains on the rho-augmented input cost, the dynamics for the
/// forward rollout, and the projection bounds.  Everything here is
/// parameter-independent; per-solve work is matrix-vector only.
template <typename Scalar>
struct AdmmCache {
  MatX<Scalar> F, G;
  std::vector<MatX<Scalar>> K;   // feedback gains, one per stage
  std::vector<MatX<Scalar>> C1;  // (R + rho I + G'P_{k+1}G)^{-1}
  std::vector<MatX<Scalar>> C2;  // (F - G K_k)'
  VecX<Scalar> u_lo, u_hi;
  int N = 0;
  Scalar rho = Scalar(1);
  Scalar eps_primal = Scalar(1e-4);
  Scalar eps_dual = Scalar(1e-4);
  int max_iter = 100;
  std::uint64_t checksum = 0;

  int nz() const { return static_cast<int>(F.rows()); }
  int nu() const { return static_cast<int>(G.cols()); }
};

using AdmmCached = AdmmCache<double>;

/// Builds the cache.  The OCP's stage constraints must encode a pure input
/// box (A_z zero, one nonzero entry per A_u row); anything else is outside
/// the baseline's structure and is rejected.
template <typename Scalar>
AdmmCache<Scalar> build_admm_cache(const OcpSpec<Scalar>& ocp, Scalar rho = Scalar(1),
                                   Scalar eps_primal = Scalar(1e-4),
                                   Scalar eps_dual = Scalar(1e-4), int max_iter = 100) {
  ocp.validate();
  if (rho <= Scalar(0)) throw DimensionMismatch("build_admm_cache: rho must be positive");

  AdmmCache<Scalar> cache;
  cache.F = ocp.F;
  cache.G = ocp.G;
  cache.N = ocp.N;
  cache.rho = rho;
  cache.eps_primal = eps_primal;
  cache.eps_dual = eps_dual;
  cache.max_iter = max_iter;
  cache.checksum = ocp.checksum();

  const int nu = ocp.nu();
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  cache.u_lo = VecX<Scalar>::Constant(nu, -inf);
  cache.u_hi = VecX<Scalar>::Constant(nu, inf);
  if (ocp.nc() > 0 && !ocp.A_z.isZero(Scalar(0)))
    throw DimensionMismatch("build_admm_cache: stage constraints must not involve the state");
  for (int i = 0; i < ocp.nc(); ++i) {
    int nonzero = -1;
    for (int j = 0; j < nu; ++j)
      if (ocp.A_u(i, j) != Scalar(0)) {
        if (nonzero >= 0) throw DimensionMismatch("build_admm_cache: constraint row is not a bound");
        nonzero = j;
      }
    if (nonzero < 0) throw DimensionMismatch("build_admm_cache: empty constraint row");
    const Scalar a = ocp.A_u(i, nonzero), b = ocp.b_s(i);
    if (a > Scalar(0))
      cache.u_hi(nonzero) = std::min(cache.u_hi(nonzero), b / a);
    else
      cache.u_lo(nonzero) = std::max(cache.u_lo(nonzero), b / a);
  }

  // Backward Riccati sweep with the augmented input weight.  The terminal
  // weight is the OCP's own P, so the splitting solves the same problem the
  // condensed QP does.
  const MatX<Scalar> R_aug = ocp.R + rho * MatX<Scalar>::Identity(nu, nu);
  MatX<Scalar> Pk = ocp.P;
  cache.K.resize(static_cast<std::size_t>(ocp.N));
  cache.C1.resize(static_cast<std::size_t>(ocp.N));
  cache.C2.resize(static_cast<std::size_t>(ocp.N));
  for (int k = ocp.N - 1; k >= 0; --k) {
    MatX<Scalar> S = R_aug + ocp.G.transpose() * Pk * ocp.G;
    Eigen::LLT<MatX<Scalar>> llt(S);
    if (llt.info() != Eigen::Success)
      throw NumericalFailure("build_admm_cache: stage cost is not positive definite");
    MatX<Scalar> Kk = llt.solve(ocp.G.transpose() * Pk * ocp.F);
    cache.K[static_cast<std::size_t>(k)] = Kk;
    cache.C1[static_cast<std::size_t>(k)] = llt.solve(MatX<Scalar>::Identity(nu, nu));
    cache.C2[static_cast<std::size_t>(k)] = (ocp.F - ocp.G * Kk).transpose();
    Pk = ocp.Q + ocp.F.transpose() * Pk * ocp.F - Kk.transpose() * S * Kk;
    Pk = Scalar(0.5) * (Pk + Pk.transpose()).eval();
  }
  return cache;
}

/// Deterministic flop model of one splitting iteration (multiply-add = 2).
inline std::uint64_t admm_iteration_flops(int N, int nz, int nu) {
  const std::uint64_t z = static_cast<std::uint64_t>(nz), u = static_cast<std::uint64_t>(nu);
  const std::uint64_t backward = 2 * u * z + 3 * u + 2 * u * u + 2 * z * z + 2 * z * u + z;
  const std::uint64_t forward = 2 * u * z + u + 2 * z * z + 2 * z * u + z;
  const std::uint64_t proj_dual = 8 * u;
  return static_cast<std::uint64_t>(N) * (backward + forward + proj_dual);
}

template <typename Scalar>
struct AdmmTrace {
  /// Stacked feasible input plan [z_0; ...; z_{N-1}] (the projected copy).
  VecX<Scalar> u;
  int iterations = 0;
  bool converged = false;
  Scalar r_primal = Scalar(0);
  Scalar r_dual = Scalar(0);
  std::uint64_t flop_estimate = 0;
  std::uint64_t problem_checksum = 0;
  VecX<Scalar> theta;
};

using AdmmTraced = AdmmTrace<double>;

/// Operator-splitting solve: alternates an exact equality-constrained LQR
/// step (cached gains), a box projection, and a scaled dual update, until
/// both infinity-norm residuals meet their tolerances.
template <typename Scalar>
AdmmTrace<Scalar> admm_solve(const AdmmCache<Scalar>& cache, const VecX<Scalar>& theta) {
  const int nz = cache.nz(), nu = cache.nu(), N = cache.N;
  if (theta.size() != nz) throw DimensionMismatch("admm_solve: theta size");

  MatX<Scalar> u = MatX<Scalar>::Zero(nu, N);
  MatX<Scalar> z = MatX<Scalar>::Zero(nu, N);
  MatX<Scalar> y = MatX<Scalar>::Zero(nu, N);
  MatX<Scalar> d(nu, N);

  AdmmTrace<Scalar> trace;
  trace.problem_checksum = cache.checksum;
  trace.theta = theta;

  for (int it = 1; it <= cache.max_iter; ++it) {
    // Backward pass for the augmented linear terms r_k = rho (y_k - z_k).
    VecX<Scalar> p = VecX<Scalar>::Zero(nz);
    for (int k = N - 1; k >= 0; --k) {
      VecX<Scalar> rk = cache.rho * (y.col(k) - z.col(k));
      d.col(k) = cache.C1[static_cast<std::size_t>(k)] * (cache.G.transpose() * p + rk);
      p = cache.C2[static_cast<std::size_t>(k)] * p - cache.K[static_cast<std::size_t>(k)].transpose() * rk;
    }
    // Forward rollout.
    VecX<Scalar> x = theta;
    for (int k = 0; k < N; ++k) {
      u.col(k) = -cache.K[static_cast<std::size_t>(k)] * x - d.col(k);
      x = cache.F * x + cache.G * u.col(k);
    }
    // Projection and scaled dual update.
    MatX<Scalar> z_new = (u + y).cwiseMax(cache.u_lo.replicate(1, N)).cwiseMin(cache.u_hi.replicate(1, N));
    trace.r_primal = (u - z_new).template lpNorm<Eigen::Infinity>();
    trace.r_dual = cache.rho * (z_new - z).template lpNorm<Eigen::Infinity>();
    y += u - z_new;
    z = std::move(z_new);
    trace.iterations = it;
    if (trace.r_primal <= cache.eps_primal && trace.r_dual <= cache.eps_dual) {
      trace.converged = true;
      break;
    }
  }

  trace.u = Eigen::Map<VecX<Scalar>>(z.data(), nu * N);
  trace.flop_estimate =
      static_cast<std::uint64_t>(trace.iterations) * admm_iteration_flops(N, nz, nu);
  return trace;
}

/// Head-to-head record for one parameter solved by both methods.
template <typename Scalar>
struct ComparisonRecord {
  Scalar u0_diff_inf = Scalar(0);
  std::uint64_t flops_active_set = 0;
  std::uint64_t flops_splitting = 0;
  int iters_active_set = 0;
  int iters_splitting = 0;
  bool both_converged = false;
};

template <typename Scalar>
ComparisonRecord<Scalar> compare_traces(const SolveTrace<Scalar>& a, const AdmmTrace<Scalar>& b,
                                        int nu) {
  if (a.problem_checksum != b.problem_checksum)
    throw MismatchedProblem("compare_traces: traces come from different problems");
  if (a.theta.size() != b.theta.size() || a.theta != b.theta)
    throw MismatchedProblem("compare_traces: traces come from different parameters");
  ComparisonRecord<Scalar> rec;
  rec.u0_diff_inf = (a.x_star.head(nu) - b.u.head(nu)).template lpNorm<Eigen::Infinity>();
  rec.flops_active_set = a.flop_estimate;
  rec.flops_splitting = b.flop_estimate;
  rec.iters_active_set = a.iterations;
  rec.iters_splitting = b.iterations;
  rec.both_converged = (a.status == SolveStatus::Optimal) && b.converged;
  return rec;
}

}  // namespace mpcert
