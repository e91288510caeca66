#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "mpcert/types.hpp"

namespace mpcert {

/// Thrown by solve_kkt when the working-set rows are (numerically) dependent.
struct SingularKkt : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ordered set of active inequality indices.  Order is insertion order and is
/// part of the value: two sets with the same members in different order
/// compare unequal.
class WorkingSet {
 public:
  WorkingSet() = default;

  explicit WorkingSet(std::vector<int> indices) : idx_(std::move(indices)) {
    for (std::size_t a = 0; a < idx_.size(); ++a) {
      if (idx_[a] < 0) throw DimensionMismatch("WorkingSet: negative index");
      for (std::size_t b = a + 1; b < idx_.size(); ++b)
        if (idx_[a] == idx_[b]) throw DimensionMismatch("WorkingSet: duplicate index");
    }
  }

  bool contains(int i) const {
    return std::find(idx_.begin(), idx_.end(), i) != idx_.end();
  }

  /// Position of index i, or -1 when absent.
  int position_of(int i) const {
    auto it = std::find(idx_.begin(), idx_.end(), i);
    return it == idx_.end() ? -1 : static_cast<int>(it - idx_.begin());
  }

  void add(int i) {
    if (i < 0) throw DimensionMismatch("WorkingSet::add: negative index");
    if (contains(i)) throw DimensionMismatch("WorkingSet::add: duplicate index");
    idx_.push_back(i);
  }

  void remove(int i) {
    auto it = std::find(idx_.begin(), idx_.end(), i);
    if (it == idx_.end()) throw DimensionMismatch("WorkingSet::remove: index absent");
    idx_.erase(it);
  }

  void remove_position(int pos) {
    if (pos < 0 || pos >= static_cast<int>(idx_.size()))
      throw DimensionMismatch("WorkingSet::remove_position: out of range");
    idx_.erase(idx_.begin() + pos);
  }

  int size() const { return static_cast<int>(idx_.size()); }
  bool empty() const { return idx_.empty(); }
  int operator[](int pos) const { return idx_[static_cast<std::size_t>(pos)]; }
  const std::vector<int>& indices() const { return idx_; }

  bool operator==(const WorkingSet& o) const { return idx_ == o.idx_; }
  bool operator!=(const WorkingSet& o) const { return idx_ != o.idx_; }

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t a = 0; a < idx_.size(); ++a) {
      if (a) s += ",";
      s += std::to_string(idx_[a]);
    }
    return s + "}";
  }

 private:
  std::vector<int> idx_;
};

/// Strictly convex inequality-constrained QP
///   min  0.5 x'Hx + f'x   s.t.  Ax <= b
/// with H symmetric positive definite.
template <typename Scalar>
struct DenseQp {
  MatX<Scalar> H;
  VecX<Scalar> f;
  MatX<Scalar> A;
  VecX<Scalar> b;

  int n() const { return static_cast<int>(H.rows()); }
  int m() const { return static_cast<int>(A.rows()); }

  void validate() const {
    if (H.rows() != H.cols()) throw DimensionMismatch("DenseQp: H not square");
    if (f.size() != H.rows()) throw DimensionMismatch("DenseQp: f size");
    if (A.cols() != H.rows() && A.rows() > 0) throw DimensionMismatch("DenseQp: A cols");
    if (b.size() != A.rows()) throw DimensionMismatch("DenseQp: b size");
  }

  std::uint64_t checksum() const {
    std::uint64_t h = detail::fnv_seed();
    h = checksum_accumulate(h, H);
    h = checksum_accumulate(h, f);
    h = checksum_accumulate(h, A);
    h = checksum_accumulate(h, b);
    return h;
  }
};

using DenseQpd = DenseQp<double>;

/// Dual representation of a DenseQp:  Mfac = A L^{-T} with H = L L' and
/// d = b + A H^{-1} f, so the dual Hessian is Mfac Mfac' = A H^{-1} A'.
template <typename Scalar>
struct DualQp {
  MatX<Scalar> Mfac;
  VecX<Scalar> d;
  DenseQp<Scalar> source;
};

/// Builds the dual representation.  Throws NumericalFailure when H has no
/// Cholesky factorization (not positive definite).
template <typename Scalar>
DualQp<Scalar> to_dual(const DenseQp<Scalar>& qp) {
  qp.validate();
  Eigen::LLT<MatX<Scalar>> llt(qp.H);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("to_dual: H is not positive definite");
  DualQp<Scalar> dual;
  // Mfac' = L^{-1} A'.
  MatX<Scalar> Mt = llt.matrixL().solve(qp.A.transpose());
  dual.Mfac = Mt.transpose();
  VecX<Scalar> Linv_f = llt.matrixL().solve(qp.f);
  dual.d = qp.b + dual.Mfac * Linv_f;
  dual.source = qp;
  return dual;
}

/// Solves the equality-constrained KKT system for working set W:
///   [H  A_W'] [x     ]   [-f ]
///   [A_W  0 ] [lambda] = [b_W]
/// via the Schur complement on the Cholesky factor of H.  Throws SingularKkt
/// when A_W has (numerically) dependent rows.
template <typename Scalar>
struct KktSolution {
  VecX<Scalar> x;
  VecX<Scalar> lambda_w;
};

template <typename Scalar>
KktSolution<Scalar> solve_kkt(const DenseQp<Scalar>& qp, const WorkingSet& ws) {
  qp.validate();
  for (int i : ws.indices())
    if (i >= qp.m()) throw DimensionMismatch("solve_kkt: working-set index out of range");

  Eigen::LLT<MatX<Scalar>> llt(qp.H);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("solve_kkt: H is not positive definite");

  KktSolution<Scalar> sol;
  const int w = ws.size();
  if (w == 0) {
    sol.x = llt.solve(-qp.f);
    sol.lambda_w.resize(0);
    return sol;
  }

  MatX<Scalar> Aw(w, qp.n());
  VecX<Scalar> bw(w);
  for (int p = 0; p < w; ++p) {
    Aw.row(p) = qp.A.row(ws[p]);
    bw(p) = qp.b(ws[p]);
  }

  // S = A_W H^{-1} A_W',  S lambda = -(b_W + A_W H^{-1} f).
  MatX<Scalar> Mt = llt.matrixL().solve(Aw.transpose());
  MatX<Scalar> S = Mt.transpose() * Mt;
  Eigen::LLT<MatX<Scalar>> llt_s(S);
  if (llt_s.info() != Eigen::Success)
    throw SingularKkt("solve_kkt: dependent working-set rows");
  const Scalar dmin = llt_s.matrixLLT().diagonal().minCoeff();
  const Scalar dmax = S.diagonal().maxCoeff();
  if (dmin * dmin <= Scalar(1e-12) * std::max(dmax, Scalar(1)))
    throw SingularKkt("solve_kkt: nearly dependent working-set rows");

  VecX<Scalar> dw = bw + Mt.transpose() * llt.matrixL().solve(qp.f);
  sol.lambda_w = llt_s.solve(-dw);
  sol.x = llt.solve(-(qp.f + Aw.transpose() * sol.lambda_w));
  return sol;
}

/// Checks the KKT conditions of (x, lambda) for the QP at tolerances
/// (eps_primal, eps_dual).  lambda has one entry per constraint row.
template <typename Scalar>
bool check_kkt(const DenseQp<Scalar>& qp, const VecX<Scalar>& x, const VecX<Scalar>& lambda,
               Scalar eps_primal, Scalar eps_dual) {
  qp.validate();
  if (x.size() != qp.n()) throw DimensionMismatch("check_kkt: x size");
  if (lambda.size() != qp.m()) throw DimensionMismatch("check_kkt: lambda size");

  const Scalar fscale = Scalar(1) + qp.f.template lpNorm<Eigen::Infinity>();
  const Scalar bscale = Scalar(1) + (qp.m() > 0 ? qp.b.template lpNorm<Eigen::Infinity>() : Scalar(0));

  VecX<Scalar> stat = qp.H * x + qp.f;
  if (qp.m() > 0) stat += qp.A.transpose() * lambda;
  if (stat.template lpNorm<Eigen::Infinity>() > eps_dual * fscale) return false;

  if (qp.m() == 0) return true;

  VecX<Scalar> slack = qp.A * x - qp.b;
  if (slack.maxCoeff() > eps_primal * bscale) return false;
  if (lambda.minCoeff() < -eps_dual) return false;
  for (int i = 0; i < qp.m(); ++i)
    if (std::abs(lambda(i) * slack(i)) > eps_primal * bscale) return false;
  return true;
}

}  // namespace mpcert
