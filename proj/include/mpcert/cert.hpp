#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mpcert/condense.hpp"
#include "mpcert/dual_active_set.hpp"
#include "mpcert/polyhedron.hpp"

namespace mpcert {

enum class RegionStatus { Optimal, IterationCapReached, InfeasibleDetected };

inline const char* to_string(RegionStatus s) {
  switch (s) {
    case RegionStatus::Optimal: return "optimal";
    case RegionStatus::IterationCapReached: return "iteration_cap_reached";
    case RegionStatus::InfeasibleDetected: return "infeasible_detected";
  }
  return "unknown";
}

/// One cell of the parameter-space partition: all parameters in poly drive
/// the solver through the same working-set sequence.
template <typename Scalar>
struct Region {
  Polyhedron<Scalar> poly;
  std::vector<WorkingSet> ws_sequence;
  int iterations = 0;
  RegionStatus status = RegionStatus::Optimal;
  /// Interior witness (deepest point of poly) and its margin to the facets.
  VecX<Scalar> witness;
  Scalar witness_radius = Scalar(0);
  std::vector<int> path;
  int id = -1;
};

struct CertConfig {
  /// Exploration stops (with complete = false) once this many regions exist.
  std::uint64_t region_budget = 1000000;
  /// Candidate regions whose inradius falls below this are dropped.
  double sliver_radius = 1e-9;
  /// Nodes processed concurrently per batch; the resulting partition is
  /// independent of this for complete runs.
  int workers = 1;
};

template <typename Scalar>
struct Partition {
  std::vector<Region<Scalar>> regions;
  Polyhedron<Scalar> theta_set;
  std::uint64_t family_checksum = 0;
  bool complete = true;
  int capped_regions = 0;
  int infeasible_regions = 0;
  int dropped_slivers = 0;
  int max_iterations = 0;
};

using Partitiond = Partition<double>;

namespace detail {

template <typename Scalar>
struct CertContext {
  const ParametricQp<Scalar>& pqp;
  SolverConfig<Scalar> cfg;
  DualGeometry<Scalar> geo;
  MatX<Scalar> mu0;  // m x (d+1), dual gradient of the unconstrained iterate
  int n, m, d;
  double sliver_radius;
};

enum CertPhase { kNormalize = 0, kOuter = 1, kInner = 2 };

template <typename Scalar>
struct CertNode {
  Polyhedron<Scalar> poly;
  VecX<Scalar> cheb_center;
  Scalar cheb_radius = Scalar(0);
  WorkingSet ws;
  DualHessianFactor<Scalar> factor;
  MatX<Scalar> lam;  // m x (d+1) affine multipliers
  MatX<Scalar> mu;   // m x (d+1) affine dual gradient
  std::vector<WorkingSet> ws_seq;
  int iters = 0;
  int phase = kOuter;
  int target = -1;
  std::vector<int> path;
};

template <typename Scalar>
struct ProcessResult {
  std::vector<Region<Scalar>> leaves;
  std::vector<CertNode<Scalar>> children;
  int dropped_slivers = 0;
};

template <typename Scalar>
Region<Scalar> node_to_region(const CertNode<Scalar>& node, RegionStatus status) {
  Region<Scalar> r;
  r.poly = node.poly;
  r.ws_sequence = node.ws_seq;
  r.iterations = node.iters;
  r.status = status;
  r.witness = node.cheb_center;
  r.witness_radius = node.cheb_radius;
  r.path = node.path;
  return r;
}

/// Intersects the parent cell with affine halfspaces rows_g * [1; theta] <= 0.
/// Returns the refined node (poly reduced, witness recomputed) or nothing
/// when the candidate is empty or a sliver.
template <typename Scalar>
std::optional<CertNode<Scalar>> refine_node(const CertNode<Scalar>& parent,
                                            const MatX<Scalar>& rows_g, int branch_id,
                                            double sliver_radius, int* dropped_slivers) {
  const int d = static_cast<int>(rows_g.cols()) - 1;
  std::vector<int> keep;
  for (int i = 0; i < rows_g.rows(); ++i) {
    const Scalar coef_scale = rows_g.row(i).tail(d).template lpNorm<Eigen::Infinity>();
    if (coef_scale <= Scalar(1e-12)) {
      if (rows_g(i, 0) > Scalar(1e-12)) return std::nullopt;  // unsatisfiable row
      continue;                                               // trivially true row
    }
    keep.push_back(i);
  }

  MatX<Scalar> A(static_cast<int>(keep.size()), d);
  VecX<Scalar> b(static_cast<int>(keep.size()));
  for (std::size_t p = 0; p < keep.size(); ++p) {
    const int i = keep[p];
    const Scalar norm = rows_g.row(i).tail(d).norm();
    A.row(static_cast<int>(p)) = rows_g.row(i).tail(d) / norm;
    b(static_cast<int>(p)) = -rows_g(i, 0) / norm;
  }

  Polyhedron<Scalar> cand = parent.poly.appended(A, b);
  auto cheb = chebyshev_center(cand);
  if (cheb.radius < Scalar(sliver_radius)) {
    if (cheb.radius >= Scalar(0)) ++*dropped_slivers;
    return std::nullopt;
  }

  CertNode<Scalar> child = parent;
  child.poly = reduce(cand);
  auto cheb2 = chebyshev_center(child.poly);
  child.cheb_center = cheb2.center;
  child.cheb_radius = cheb2.radius;
  child.path.push_back(branch_id);
  return child;
}

/// Expands one node.  Branch structure and state updates mirror
/// dual_active_set_solve exactly; any change there must be reflected here.
template <typename Scalar>
ProcessResult<Scalar> process_node(const CertContext<Scalar>& ctx, const CertNode<Scalar>& node) {
  ProcessResult<Scalar> out;
  const int m = ctx.m, d = ctx.d;
  const Scalar eps_p = ctx.cfg.eps_primal;

  auto refine = [&](const MatX<Scalar>& rows_g, int branch_id) {
    return refine_node(node, rows_g, branch_id, ctx.sliver_radius, &out.dropped_slivers);
  };

  if (node.phase == kNormalize) {
    // Warm-start normalization: equality-constrained multipliers on the
    // current set; drop the most negative entry until all are nonnegative.
    const int w = node.ws.size();
    MatX<Scalar> mu_w(w, d + 1);
    for (int p = 0; p < w; ++p) mu_w.row(p) = node.mu.row(node.ws[p]);
    MatX<Scalar> lam_w = node.factor.solve_columns(mu_w);

    {  // done branch: lambda_W >= 0 on the whole child cell
      MatX<Scalar> rows(w, d + 1);
      for (int p = 0; p < w; ++p) rows.row(p) = -lam_w.row(p);
      if (auto child = refine(rows, 0)) {
        for (int p = 0; p < w; ++p) child->lam.row(node.ws[p]) = lam_w.row(p);
        MatX<Scalar> dcols(m, w);
        for (int p = 0; p < w; ++p) dcols.col(p) = ctx.geo.D.col(node.ws[p]);
        child->mu -= dcols * lam_w;
        child->phase = kOuter;
        out.children.push_back(std::move(*child));
      }
    }
    for (int p = 0; p < w; ++p) {  // drop branches: entry p is the first minimum and negative
      MatX<Scalar> rows(w, d + 1);
      rows.row(0) = lam_w.row(p);
      int rr = 1;
      for (int q = 0; q < w; ++q) {
        if (q == p) continue;
        rows.row(rr++) = lam_w.row(p) - lam_w.row(q);
      }
      if (auto child = refine(rows, 1 + p)) {
        if (node.iters == ctx.cfg.max_iter) {
          out.leaves.push_back(node_to_region(*child, RegionStatus::IterationCapReached));
          continue;
        }
        child->factor.drop(p);
        child->ws.remove_position(p);
        ++child->iters;
        child->ws_seq.push_back(child->ws);
        // During normalization lam stays zero and mu stays at the
        // unconstrained value, so no state reset is needed when ws empties.
        child->phase = child->ws.empty() ? kOuter : kNormalize;
        out.children.push_back(std::move(*child));
      }
    }
    return out;
  }

  if (node.phase == kOuter) {
    if (m == 0) {
      out.leaves.push_back(node_to_region(node, RegionStatus::Optimal));
      return out;
    }
    {  // optimality leaf: every dual gradient entry within tolerance
      MatX<Scalar> rows = node.mu;
      rows.col(0).array() -= eps_p;
      if (auto child = refine(rows, 0))
        out.leaves.push_back(node_to_region(*child, RegionStatus::Optimal));
    }
    for (int j = 0; j < m; ++j) {  // constraint j is the first maximum and violated
      MatX<Scalar> rows(m, d + 1);
      rows.row(0) = -node.mu.row(j);
      rows(0, 0) += eps_p;
      int rr = 1;
      for (int i = 0; i < m; ++i) {
        if (i == j) continue;
        rows.row(rr++) = node.mu.row(i) - node.mu.row(j);
      }
      if (auto child = refine(rows, 1 + j)) {
        child->phase = kInner;
        child->target = j;
        out.children.push_back(std::move(*child));
      }
    }
    return out;
  }

  // Inner phase: drive the target constraint into the working set.
  const int j = node.target;
  if (node.iters == ctx.cfg.max_iter) {
    out.leaves.push_back(node_to_region(node, RegionStatus::IterationCapReached));
    return out;
  }
  const auto sg = node.factor.step_geometry(j);
  if (!sg.addable && sg.blockers.empty()) {
    out.leaves.push_back(node_to_region(node, RegionStatus::InfeasibleDetected));
    return out;
  }

  if (sg.addable) {  // full-step branch: tau_full <= every blocker ratio
    MatX<Scalar> rows(static_cast<int>(sg.blockers.size()), d + 1);
    for (std::size_t a = 0; a < sg.blockers.size(); ++a) {
      const int p = sg.blockers[a];
      rows.row(static_cast<int>(a)) =
          sg.r(p) * node.mu.row(j) - sg.curvature * node.lam.row(node.ws[p]);
    }
    if (auto child = refine(rows, 0)) {
      MatX<Scalar> tau = node.mu.row(j) / sg.curvature;
      for (int p = 0; p < node.ws.size(); ++p) child->lam.row(node.ws[p]) -= sg.r(p) * tau;
      child->lam.row(j) += tau;
      child->mu += sg.mu_dir * tau;
      if (!child->factor.push(j)) throw NumericalFailure("certify: factor update diverged from solver");
      child->ws.add(j);
      ++child->iters;
      child->ws_seq.push_back(child->ws);
      child->phase = kOuter;
      child->target = -1;
      out.children.push_back(std::move(*child));
    }
  }
  for (std::size_t a = 0; a < sg.blockers.size(); ++a) {  // partial-step branches
    const int k = sg.blockers[a];
    const int extra = sg.addable ? 1 : 0;
    MatX<Scalar> rows(static_cast<int>(sg.blockers.size()) - 1 + extra, d + 1);
    int rr = 0;
    if (sg.addable)
      rows.row(rr++) = sg.curvature * node.lam.row(node.ws[k]) - sg.r(k) * node.mu.row(j);
    for (std::size_t q = 0; q < sg.blockers.size(); ++q) {
      if (q == a) continue;
      const int p = sg.blockers[q];
      rows.row(rr++) = sg.r(p) * node.lam.row(node.ws[k]) - sg.r(k) * node.lam.row(node.ws[p]);
    }
    if (auto child = refine(rows, 1 + static_cast<int>(a))) {
      MatX<Scalar> tau = node.lam.row(node.ws[k]) / sg.r(k);
      for (int p = 0; p < node.ws.size(); ++p) child->lam.row(node.ws[p]) -= sg.r(p) * tau;
      child->lam.row(node.ws[k]).setZero();
      child->lam.row(j) += tau;
      child->mu += sg.mu_dir * tau;
      child->factor.drop(k);
      child->ws.remove_position(k);
      ++child->iters;
      child->ws_seq.push_back(child->ws);
      out.children.push_back(std::move(*child));
    }
  }
  return out;
}

}  // namespace detail

/// Partitions the parameter set into cells of constant solver behaviour by
/// symbolically replaying the dual active-set method: multipliers and the
/// dual gradient stay affine in theta, every branch decision is an affine
/// comparison, and each comparison outcome spawns a child cell.  Exploration
/// is depth-first and deterministic; regions are sorted by branch path.
template <typename Scalar>
Partition<Scalar> certify(const ParametricQp<Scalar>& pqp, const Polyhedron<Scalar>& theta_set,
                          const SolverConfig<Scalar>& scfg = {}, const CertConfig& ccfg = {}) {
  pqp.validate();
  theta_set.validate();
  scfg.validate();
  if (theta_set.dim() != pqp.d()) throw DimensionMismatch("certify: theta dimension");
  for (int i : scfg.initial_ws.indices())
    if (i >= pqp.m()) throw DimensionMismatch("certify: initial_ws out of range");

  Partition<Scalar> part;
  part.theta_set = theta_set;
  part.family_checksum = pqp.source_checksum;

  detail::CertContext<Scalar> ctx{pqp,      scfg,    DualGeometry<Scalar>(pqp.H, pqp.A),
                                  MatX<Scalar>(), pqp.n(), pqp.m(),
                                  pqp.d(),  ccfg.sliver_radius};
  MatX<Scalar> rhs(ctx.n, ctx.d + 1);
  rhs.col(0) = pqp.f0;
  rhs.rightCols(ctx.d) = pqp.F_theta;
  MatX<Scalar> x_uc = -ctx.geo.llt_h.solve(rhs);
  ctx.mu0.resize(ctx.m, ctx.d + 1);
  if (ctx.m > 0) {
    ctx.mu0 = pqp.A * x_uc;
    ctx.mu0.col(0) -= pqp.b0;
    ctx.mu0.rightCols(ctx.d) -= pqp.W_theta;
  }

  detail::CertNode<Scalar> root{
      reduce(theta_set),
      VecX<Scalar>(),
      Scalar(0),
      WorkingSet{},
      DualHessianFactor<Scalar>(&ctx.geo.D, scfg.curvature_tol, scfg.blocker_tol,
                                std::min(ctx.n, ctx.m)),
      MatX<Scalar>::Zero(ctx.m, ctx.d + 1),
      ctx.mu0,
      {},
      0,
      detail::kOuter,
      -1,
      {}};
  auto cheb = chebyshev_center(root.poly);
  if (cheb.radius < Scalar(ccfg.sliver_radius)) return part;  // empty or sliver input
  root.cheb_center = cheb.center;
  root.cheb_radius = cheb.radius;
  for (int i : scfg.initial_ws.indices())
    if (root.factor.push(i)) root.ws.add(i);
  root.ws_seq.push_back(root.ws);
  root.phase = root.ws.empty() ? detail::kOuter : detail::kNormalize;

  std::deque<detail::CertNode<Scalar>> frontier;
  frontier.push_back(std::move(root));
  std::vector<Region<Scalar>> leaves;
  bool budget_hit = false;

  while (!frontier.empty()) {
    if (leaves.size() >= ccfg.region_budget) {
      budget_hit = true;
      break;
    }
    const int batch = std::min<int>(std::max(1, ccfg.workers), static_cast<int>(frontier.size()));
    std::vector<detail::CertNode<Scalar>> nodes;
    nodes.reserve(static_cast<std::size_t>(batch));
    for (int i = 0; i < batch; ++i) {
      nodes.push_back(std::move(frontier.front()));
      frontier.pop_front();
    }
    std::vector<detail::ProcessResult<Scalar>> results(static_cast<std::size_t>(batch));
    if (batch == 1) {
      results[0] = detail::process_node(ctx, nodes[0]);
    } else {
      std::vector<std::future<detail::ProcessResult<Scalar>>> futs;
      futs.reserve(static_cast<std::size_t>(batch));
      for (int i = 0; i < batch; ++i)
        futs.push_back(std::async(std::launch::async, [&ctx, &nodes, i] {
          return detail::process_node(ctx, nodes[static_cast<std::size_t>(i)]);
        }));
      for (int i = 0; i < batch; ++i) results[static_cast<std::size_t>(i)] = futs[static_cast<std::size_t>(i)].get();
    }
    // Splice depth-first: children of the first batch node are processed
    // next, so the traversal order is independent of the batch size.
    for (int i = batch - 1; i >= 0; --i) {
      auto& res = results[static_cast<std::size_t>(i)];
      part.dropped_slivers += res.dropped_slivers;
      for (auto it = res.children.rbegin(); it != res.children.rend(); ++it)
        frontier.push_front(std::move(*it));
    }
    for (int i = 0; i < batch; ++i)
      for (auto& leaf : results[static_cast<std::size_t>(i)].leaves) leaves.push_back(std::move(leaf));
  }

  part.complete = !budget_hit && frontier.empty();
  std::sort(leaves.begin(), leaves.end(),
            [](const Region<Scalar>& a, const Region<Scalar>& b) { return a.path < b.path; });
  for (std::size_t i = 0; i < leaves.size(); ++i) leaves[i].id = static_cast<int>(i);
  for (const auto& r : leaves) {
    if (r.status == RegionStatus::IterationCapReached) ++part.capped_regions;
    if (r.status == RegionStatus::InfeasibleDetected) ++part.infeasible_regions;
    part.max_iterations = std::max(part.max_iterations, r.iterations);
  }
  part.regions = std::move(leaves);
  return part;
}

/// Thrown by wcet on an empty measurement vector.
struct EmptyMeasurement : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
struct MeasurementVector {
  std::vector<int> region_ids;
  std::vector<double> tau;
  std::vector<VecX<Scalar>> witnesses;
  std::string mode;
};

using MeasurementVectord = MeasurementVector<double>;

/// Evaluates a per-parameter cost at every region witness.
template <typename Scalar, typename CostFn>
MeasurementVector<Scalar> measure(const Partition<Scalar>& part, CostFn&& cost,
                                  const std::string& mode) {
  MeasurementVector<Scalar> mv;
  mv.mode = mode;
  for (const auto& region : part.regions) {
    mv.region_ids.push_back(region.id);
    mv.witnesses.push_back(region.witness);
    mv.tau.push_back(static_cast<double>(cost(region.witness)));
  }
  return mv;
}

struct WcetResult {
  double value = 0;
  int region_id = -1;
};

template <typename Scalar>
WcetResult wcet(const MeasurementVector<Scalar>& mv) {
  if (mv.tau.empty()) throw EmptyMeasurement("wcet: no measurements");
  WcetResult res;
  res.value = mv.tau[0];
  res.region_id = mv.region_ids[0];
  for (std::size_t i = 1; i < mv.tau.size(); ++i)
    if (mv.tau[i] > res.value) {
      res.value = mv.tau[i];
      res.region_id = mv.region_ids[i];
    }
  return res;
}

/// Cost functors for measure().
template <typename Scalar>
auto flops_cost(ParametricQp<Scalar> pqp, SolverConfig<Scalar> cfg) {
  return [pqp = std::move(pqp), cfg](const VecX<Scalar>& theta) {
    return static_cast<double>(dual_active_set_solve(instantiate(pqp, theta), cfg).flop_estimate);
  };
}

template <typename Scalar>
auto wallclock_cost(ParametricQp<Scalar> pqp, SolverConfig<Scalar> cfg, int repeats = 3) {
  return [pqp = std::move(pqp), cfg, repeats](const VecX<Scalar>& theta) {
    auto qp = instantiate(pqp, theta);
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      auto trace = dual_active_set_solve(qp, cfg);
      const auto t1 = std::chrono::steady_clock::now();
      (void)trace;
      best = std::min(best, std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
    return best;
  };
}

}  // namespace mpcert
