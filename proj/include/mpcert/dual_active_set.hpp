#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "mpcert/cost_model.hpp"
#include "mpcert/qp.hpp"
#include "mpcert/types.hpp"

namespace mpcert {

enum class SolveStatus {
  Optimal,
  IterationCapReached,
  InfeasibleDetected,
  NumericalFailure,
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::IterationCapReached: return "iteration_cap_reached";
    case SolveStatus::InfeasibleDetected: return "infeasible_detected";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

template <typename Scalar>
struct SolverConfig {
  Scalar eps_primal = Scalar(1e-4);
  Scalar eps_dual = Scalar(1e-4);
  int max_iter = 100;
  WorkingSet initial_ws{};
  /// Constraint directions with Schur curvature at or below this (relative)
  /// threshold are treated as dependent on the working set.
  Scalar curvature_tol = Scalar(1e-12);
  /// Working-set entries with step-direction component above this threshold
  /// act as blockers in the ratio test.
  Scalar blocker_tol = Scalar(1e-12);

  void validate() const {
    if (!(eps_primal > Scalar(0)) || !(eps_dual > Scalar(0)))
      throw DimensionMismatch("SolverConfig: tolerances must be positive");
    if (max_iter < 1) throw DimensionMismatch("SolverConfig: max_iter must be >= 1");
  }
};

using SolverConfigd = SolverConfig<double>;

template <typename Scalar>
struct SolveTrace {
  VecX<Scalar> x_star;
  VecX<Scalar> lambda_star;
  WorkingSet active_set;
  /// Working sets visited, starting with the initial set; each solver
  /// iteration appends exactly one entry (single add or single removal).
  std::vector<WorkingSet> ws_sequence;
  int iterations = 0;
  SolveStatus status = SolveStatus::NumericalFailure;
  std::uint64_t flop_estimate = 0;
  /// Checksum of the problem the trace belongs to; used to reject
  /// cross-problem trace comparisons.
  std::uint64_t problem_checksum = 0;
  /// Parameter the instance was instantiated at (empty for plain QPs).
  VecX<Scalar> theta;
};

using SolveTraced = SolveTrace<double>;

/// Parameter-independent geometry of the dual problem for fixed (H, A):
/// Cholesky factor of H, Mfac = A L^{-T} and the dual Hessian D = Mfac Mfac'.
template <typename Scalar>
struct DualGeometry {
  Eigen::LLT<MatX<Scalar>> llt_h;
  MatX<Scalar> Mfac;
  MatX<Scalar> D;

  DualGeometry(const MatX<Scalar>& H, const MatX<Scalar>& A) : llt_h(H) {
    if (llt_h.info() != Eigen::Success)
      throw NumericalFailure("DualGeometry: H is not positive definite");
    MatX<Scalar> Mt = llt_h.matrixL().solve(A.transpose());
    Mfac = Mt.transpose();
    D = Mfac * Mfac.transpose();
  }

  /// H^{-1} V for a multi-column right-hand side.
  MatX<Scalar> solve_h(const MatX<Scalar>& V) const { return llt_h.solve(V); }
};

/// Incrementally maintained upper-triangular factor R with R'R = D[W,W].
/// Additions append a column; removals re-triangularize with Givens
/// rotations.  The factor is the single source of the step geometry shared
/// by the solver and the certifier: all quantities it produces are
/// independent of the QP's parameter vector.
template <typename Scalar>
class DualHessianFactor {
 public:
  /// cap bounds the working-set size (at most the primal dimension: every
  /// addition requires positive curvature, hence independent rows).
  DualHessianFactor(const MatX<Scalar>* D, Scalar curvature_tol, Scalar blocker_tol, int cap)
      : D_(D), cap_(cap), curvature_tol_(curvature_tol), blocker_tol_(blocker_tol) {
    R_.setZero(cap, cap);
  }

  int size() const { return static_cast<int>(W_.size()); }
  const std::vector<int>& indices() const { return W_; }

  /// Step geometry for candidate constraint j against the current set:
  /// r = D[W,W]^{-1} D[W,j], curvature c = D[j,j] - D[j,W] r, and the dual
  /// gradient direction mu_dir = -(D[:,j] - D[:,W] r) per unit step.
  struct StepGeometry {
    Scalar curvature = Scalar(0);
    bool addable = false;
    VecX<Scalar> r;
    VecX<Scalar> mu_dir;
    std::vector<int> blockers;  // positions within W with r > blocker_tol
  };

  StepGeometry step_geometry(int j) const {
    const int w = size();
    StepGeometry g;
    VecX<Scalar> dwj(w);
    for (int p = 0; p < w; ++p) dwj(p) = (*D_)(W_[static_cast<std::size_t>(p)], j);
    VecX<Scalar> y = forward_solve(dwj);
    g.curvature = (*D_)(j, j) - y.squaredNorm();
    g.addable = g.curvature > curvature_tol_ * std::max((*D_)(j, j), Scalar(1));
    g.r = backward_solve(y);
    g.mu_dir = -(*D_).col(j);
    for (int p = 0; p < w; ++p) g.mu_dir += (*D_).col(W_[static_cast<std::size_t>(p)]) * g.r(p);
    for (int p = 0; p < w; ++p)
      if (g.r(p) > blocker_tol_) g.blockers.push_back(p);
    return g;
  }

  /// Appends j.  Returns false (leaving the factor unchanged) when the
  /// curvature pivot is not positive.
  bool push(int j) {
    const int w = size();
    if (w == cap_) return false;
    VecX<Scalar> dwj(w);
    for (int p = 0; p < w; ++p) dwj(p) = (*D_)(W_[static_cast<std::size_t>(p)], j);
    VecX<Scalar> y = forward_solve(dwj);
    const Scalar rho2 = (*D_)(j, j) - y.squaredNorm();
    if (!(rho2 > curvature_tol_ * std::max((*D_)(j, j), Scalar(1)))) return false;
    R_.col(w).head(w) = y;
    R_(w, w) = std::sqrt(rho2);
    W_.push_back(j);
    return true;
  }

  /// Removes the entry at position pos, restoring triangularity.
  void drop(int pos) {
    const int w = size();
    for (int c = pos; c + 1 < w; ++c) R_.col(c).head(w) = R_.col(c + 1).head(w);
    R_.col(w - 1).head(w).setZero();
    W_.erase(W_.begin() + pos);
    // Rows pos..w-2 now carry a subdiagonal; rotate it away.
    for (int k = pos; k + 1 < w; ++k) {
      Eigen::JacobiRotation<Scalar> rot;
      rot.makeGivens(R_(k, k), R_(k + 1, k));
      for (int c = k; c < w - 1; ++c) {
        const Scalar a = R_(k, c), b = R_(k + 1, c);
        R_(k, c) = rot.c() * a - rot.s() * b;
        R_(k + 1, c) = rot.s() * a + rot.c() * b;
      }
      if (R_(k, k) < Scalar(0)) {
        R_.row(k).segment(k, w - 1 - k) = -R_.row(k).segment(k, w - 1 - k);
      }
      R_(k + 1, k) = Scalar(0);
    }
  }

  /// Solves D[W,W] z = v through the factor.
  VecX<Scalar> solve(const VecX<Scalar>& v) const { return backward_solve(forward_solve(v)); }

  /// Column-wise solve for a multi-column right-hand side.
  MatX<Scalar> solve_columns(const MatX<Scalar>& V) const {
    MatX<Scalar> out(V.rows(), V.cols());
    for (int c = 0; c < V.cols(); ++c) out.col(c) = solve(VecX<Scalar>(V.col(c)));
    return out;
  }

 private:
  VecX<Scalar> forward_solve(const VecX<Scalar>& v) const {
    const int w = size();
    return R_.topLeftCorner(w, w).transpose().template triangularView<Eigen::Lower>().solve(v);
  }
  VecX<Scalar> backward_solve(const VecX<Scalar>& v) const {
    const int w = size();
    return R_.topLeftCorner(w, w).template triangularView<Eigen::Upper>().solve(v);
  }

  const MatX<Scalar>* D_;
  int cap_;
  std::vector<int> W_;
  MatX<Scalar> R_;
  Scalar curvature_tol_;
  Scalar blocker_tol_;
};

namespace detail {

/// First index attaining the maximum (strictly-greater scan).
template <typename Scalar>
int argmax_first(const VecX<Scalar>& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

/// Among blocker positions, the first one attaining the minimum ratio
/// lambda/r, compared by cross-multiplication.
template <typename Scalar>
int min_ratio_position(const WorkingSet& ws, const VecX<Scalar>& lambda, const VecX<Scalar>& r,
                       const std::vector<int>& blockers) {
  int k = blockers[0];
  for (std::size_t a = 1; a < blockers.size(); ++a) {
    const int p = blockers[a];
    if (lambda(ws[p]) * r(k) < lambda(ws[k]) * r(p)) k = p;
  }
  return k;
}

}  // namespace detail

/// Dual active-set solve of a strictly convex QP.  Starts from the
/// unconstrained optimum with multipliers at zero, repeatedly selects the
/// most violated constraint, and takes dual ascent steps that either
/// activate it or deactivate the working-set entry blocking dual
/// feasibility (minimum-ratio rule, lowest index on ties).  Each working-set
/// change counts as one iteration.
///
/// geo_ext, when given, must be built from this qp's H and A; it lets
/// callers solving many instances of one parametric family skip the
/// factorization (the flop model prices exactly that deployment).
template <typename Scalar>
SolveTrace<Scalar> dual_active_set_solve(const DenseQp<Scalar>& qp,
                                         const SolverConfig<Scalar>& cfg = {},
                                         const DualGeometry<Scalar>* geo_ext = nullptr) {
  qp.validate();
  cfg.validate();
  for (int i : cfg.initial_ws.indices())
    if (i >= qp.m()) throw DimensionMismatch("dual_active_set_solve: initial_ws out of range");

  SolveTrace<Scalar> trace;
  trace.problem_checksum = qp.checksum();
  const int n = qp.n(), m = qp.m();

  std::unique_ptr<DualGeometry<Scalar>> geo_local;
  const DualGeometry<Scalar>* geo = geo_ext;
  if (geo == nullptr) {
    try {
      geo_local = std::make_unique<DualGeometry<Scalar>>(qp.H, qp.A);
    } catch (const NumericalFailure&) {
      trace.status = SolveStatus::NumericalFailure;
      return trace;
    }
    geo = geo_local.get();
  }

  VecX<Scalar> x_uc = geo->llt_h.solve(-qp.f);
  VecX<Scalar> mu = m > 0 ? VecX<Scalar>(qp.A * x_uc - qp.b) : VecX<Scalar>(0);
  VecX<Scalar> lambda = VecX<Scalar>::Zero(m);

  DualHessianFactor<Scalar> factor(&geo->D, cfg.curvature_tol, cfg.blocker_tol, std::min(n, m));
  WorkingSet ws;
  trace.iterations = 0;
  bool done = false;

  // Warm-start normalization: reduce the given set to an independent subset,
  // then drop entries until the equality-constrained multipliers are
  // nonnegative (most-negative first).  Each drop counts as one iteration.
  if (!cfg.initial_ws.empty()) {
    for (int i : cfg.initial_ws.indices())
      if (factor.push(i)) ws.add(i);
    trace.ws_sequence.push_back(ws);
    while (!ws.empty()) {
      VecX<Scalar> muw(ws.size());
      for (int p = 0; p < ws.size(); ++p) muw(p) = mu(ws[p]);
      VecX<Scalar> lam_w = factor.solve(muw);
      int worst = 0;
      for (int p = 1; p < ws.size(); ++p)
        if (lam_w(p) < lam_w(worst)) worst = p;
      if (lam_w(worst) >= Scalar(0)) {
        for (int p = 0; p < ws.size(); ++p) lambda(ws[p]) = lam_w(p);
        break;
      }
      if (trace.iterations == cfg.max_iter) {
        for (int p = 0; p < ws.size(); ++p) lambda(ws[p]) = std::max(lam_w(p), Scalar(0));
        trace.status = SolveStatus::IterationCapReached;
        done = true;
        break;
      }
      factor.drop(worst);
      ws.remove_position(worst);
      ++trace.iterations;
      trace.ws_sequence.push_back(ws);
    }
    if (!done && !ws.empty()) {
      // mu at the equality-constrained iterate: mu_uc - D[:,W] lambda_W.
      for (int p = 0; p < ws.size(); ++p) mu -= geo->D.col(ws[p]) * lambda(ws[p]);
    }
  } else {
    trace.ws_sequence.push_back(ws);
  }

  while (!done) {
    // Constraint check: most violated row, first index on ties.
    if (m == 0) {
      trace.status = SolveStatus::Optimal;
      break;
    }
    const int j = detail::argmax_first(mu);
    if (mu(j) <= cfg.eps_primal) {
      trace.status = SolveStatus::Optimal;
      break;
    }

    // Inner loop: drive constraint j into the working set.
    while (true) {
      if (trace.iterations == cfg.max_iter) {
        trace.status = SolveStatus::IterationCapReached;
        done = true;
        break;
      }
      const auto sg = factor.step_geometry(j);
      if (!sg.addable && sg.blockers.empty()) {
        trace.status = SolveStatus::InfeasibleDetected;
        done = true;
        break;
      }

      bool full = sg.addable;
      if (full) {
        // Full step iff mu_j / c_j <= lambda_p / r_p for every blocker p.
        for (int p : sg.blockers) {
          if (mu(j) * sg.r(p) > lambda(ws[p]) * sg.curvature) {
            full = false;
            break;
          }
        }
      }

      if (full) {
        const Scalar tau = mu(j) / sg.curvature;
        for (int p = 0; p < ws.size(); ++p) lambda(ws[p]) -= tau * sg.r(p);
        lambda(j) += tau;
        mu += tau * sg.mu_dir;
        const bool ok = factor.push(j);
        if (!ok) {
          trace.status = SolveStatus::NumericalFailure;
          done = true;
          break;
        }
        ws.add(j);
        ++trace.iterations;
        trace.ws_sequence.push_back(ws);
        break;  // back to the constraint check
      }

      const int kpos = detail::min_ratio_position(ws, lambda, sg.r, sg.blockers);
      const Scalar tau = lambda(ws[kpos]) / sg.r(kpos);
      for (int p = 0; p < ws.size(); ++p) lambda(ws[p]) -= tau * sg.r(p);
      lambda(ws[kpos]) = Scalar(0);
      lambda(j) += tau;
      mu += tau * sg.mu_dir;
      factor.drop(kpos);
      ws.remove_position(kpos);
      ++trace.iterations;
      trace.ws_sequence.push_back(ws);
    }
  }

  trace.active_set = ws;
  trace.lambda_star = lambda;
  if (m > 0)
    trace.x_star = geo->llt_h.solve(-(qp.f + qp.A.transpose() * lambda));
  else
    trace.x_star = x_uc;
  trace.flop_estimate = cost_model(trace.ws_sequence, n, m);
  return trace;
}

}  // namespace mpcert
