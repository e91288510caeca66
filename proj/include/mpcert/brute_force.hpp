#pragma once

#include <optional>
#include <vector>

#include "mpcert/qp.hpp"
#include "mpcert/types.hpp"

namespace mpcert {

/// Thrown when the subset enumeration would exceed the configured bound.
struct EnumerationTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when no candidate active set yields a KKT point (infeasible QP).
struct NoKktPoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
struct BruteForceSolution {
  VecX<Scalar> x;
  VecX<Scalar> lambda;
  WorkingSet active_set;
};

namespace detail {

/// Assembles and solves the full (n+w) x (n+w) KKT system by LU; a path
/// deliberately disjoint from solve_kkt's Schur-complement route.
template <typename Scalar>
std::optional<BruteForceSolution<Scalar>> kkt_candidate(const DenseQp<Scalar>& qp,
                                                        const std::vector<int>& subset,
                                                        Scalar eps_primal, Scalar eps_dual) {
  const int n = qp.n(), w = static_cast<int>(subset.size());
  MatX<Scalar> K = MatX<Scalar>::Zero(n + w, n + w);
  VecX<Scalar> rhs(n + w);
  K.topLeftCorner(n, n) = qp.H;
  rhs.head(n) = -qp.f;
  for (int p = 0; p < w; ++p) {
    K.block(n + p, 0, 1, n) = qp.A.row(subset[static_cast<std::size_t>(p)]);
    K.block(0, n + p, n, 1) = qp.A.row(subset[static_cast<std::size_t>(p)]).transpose();
    rhs(n + p) = qp.b(subset[static_cast<std::size_t>(p)]);
  }
  Eigen::FullPivLU<MatX<Scalar>> lu(K);
  if (!lu.isInvertible()) return std::nullopt;
  VecX<Scalar> sol = lu.solve(rhs);

  BruteForceSolution<Scalar> out;
  out.x = sol.head(n);
  out.lambda = VecX<Scalar>::Zero(qp.m());
  for (int p = 0; p < w; ++p) out.lambda(subset[static_cast<std::size_t>(p)]) = sol(n + p);

  const Scalar bscale = Scalar(1) + (qp.m() > 0 ? qp.b.template lpNorm<Eigen::Infinity>() : Scalar(0));
  if (qp.m() > 0) {
    VecX<Scalar> slack = qp.A * out.x - qp.b;
    if (slack.maxCoeff() > eps_primal * bscale) return std::nullopt;
  }
  for (int p = 0; p < w; ++p)
    if (sol(n + p) < -eps_dual) return std::nullopt;
  out.active_set = WorkingSet(subset);
  return out;
}

inline std::uint64_t subset_count(int m, int kmax) {
  std::uint64_t total = 0;
  for (int k = 0; k <= kmax; ++k) {
    std::uint64_t c = 1;
    for (int i = 0; i < k; ++i) {
      c = c * static_cast<std::uint64_t>(m - i) / static_cast<std::uint64_t>(i + 1);
      if (c > (std::uint64_t(1) << 40)) return c;
    }
    total += c;
    if (total > (std::uint64_t(1) << 40)) return total;
  }
  return total;
}

}  // namespace detail

/// Reference solver: enumerates candidate active sets by ascending
/// cardinality (lexicographic within each cardinality) and returns the first
/// KKT-consistent one.  Intended for small instances only; throws
/// EnumerationTooLarge when more than max_subsets candidates would be tried
/// and NoKktPoint when none passes (infeasible problem).
template <typename Scalar>
BruteForceSolution<Scalar> brute_force_solve(const DenseQp<Scalar>& qp,
                                             Scalar eps_primal = Scalar(1e-9),
                                             Scalar eps_dual = Scalar(1e-9),
                                             std::uint64_t max_subsets = 1000000) {
  qp.validate();
  const int n = qp.n(), m = qp.m();
  const int kmax = std::min(n, m);
  if (detail::subset_count(m, kmax) > max_subsets)
    throw EnumerationTooLarge("brute_force_solve: subset enumeration too large");

  std::vector<int> subset;
  for (int k = 0; k <= kmax; ++k) {
    subset.assign(static_cast<std::size_t>(k), 0);
    for (int p = 0; p < k; ++p) subset[static_cast<std::size_t>(p)] = p;
    while (true) {
      if (auto sol = detail::kkt_candidate(qp, subset, eps_primal, eps_dual)) return *sol;
      if (k == 0) break;
      // Next lexicographic k-combination of {0..m-1}.
      int p = k - 1;
      while (p >= 0 && subset[static_cast<std::size_t>(p)] == m - k + p) --p;
      if (p < 0) break;
      ++subset[static_cast<std::size_t>(p)];
      for (int q = p + 1; q < k; ++q)
        subset[static_cast<std::size_t>(q)] = subset[static_cast<std::size_t>(q - 1)] + 1;
    }
  }
  throw NoKktPoint("brute_force_solve: no active set satisfies the KKT conditions");
}

}  // namespace mpcert
