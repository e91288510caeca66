#pragma once

#include <random>
#include <vector>

#include "mpcert/types.hpp"

namespace mpcert {

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <typename Scalar>
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  VecX<Scalar> x;
  Scalar objective = Scalar(0);
};

namespace detail {

/// Two-phase primal simplex for  min c'x  s.t.  Ax <= b  with free x,
/// split into nonnegative parts plus slacks and (where needed) artificials.
/// Bland's rule everywhere: entering column of lowest index with negative
/// reduced cost, leaving row whose basic variable has the lowest index among
/// minimum ratios.  Deterministic and cycle-free.
///
/// Nearly parallel rows make long degenerate stalls amplify cancellation
/// noise in the dense tableau, so the tableau is refactorized from the
/// original data (one dense LU at the current basis) every few dozen pivots
/// and before any verdict is accepted: a phase only ends when a freshly
/// refactorized tableau reproduces the verdict without further pivots.
template <typename Scalar>
class SimplexTableau {
 public:
  SimplexTableau(const VecX<Scalar>& c, const MatX<Scalar>& A, const VecX<Scalar>& b)
      : d_(static_cast<int>(c.size())), m_(static_cast<int>(A.rows())) {
    n_struct_ = 2 * d_ + m_;
    std::vector<int> art_rows;
    for (int i = 0; i < m_; ++i)
      if (b(i) < Scalar(0)) art_rows.push_back(i);
    n_art_ = static_cast<int>(art_rows.size());
    const int cols = n_struct_ + n_art_ + 1;

    T_.setZero(m_ + 1, cols);
    basis_.assign(static_cast<std::size_t>(m_), -1);
    for (int i = 0; i < m_; ++i) {
      const Scalar sign = b(i) < Scalar(0) ? Scalar(-1) : Scalar(1);
      for (int j = 0; j < d_; ++j) {
        T_(i, j) = sign * A(i, j);
        T_(i, d_ + j) = -sign * A(i, j);
      }
      T_(i, 2 * d_ + i) = sign;  // slack (negated on flipped rows)
      T_(i, cols - 1) = sign * b(i);
    }
    int a = 0;
    for (int i = 0; i < m_; ++i) {
      if (b(i) < Scalar(0)) {
        T_(i, n_struct_ + a) = Scalar(1);
        basis_[static_cast<std::size_t>(i)] = n_struct_ + a;
        ++a;
      } else {
        basis_[static_cast<std::size_t>(i)] = 2 * d_ + i;
      }
    }
    c_ = c;
    A0_ = T_.topRows(m_);  // exact standard form [A~ | b~], identity on slacks/artificials
  }

  LpResult<Scalar> solve() {
    LpResult<Scalar> res;
    const int cols = static_cast<int>(T_.cols());

    if (n_art_ > 0) {
      // Phase 1: minimize the artificial sum.
      if (!run_phase(true)) throw NumericalFailure("simplex: phase 1 did not terminate");
      const Scalar infeas = -T_(m_, cols - 1);
      if (infeas > tol_) {
        res.status = LpStatus::Infeasible;
        return res;
      }
      // Drive remaining artificials out of the basis where possible.
      for (int i = 0; i < m_; ++i) {
        if (basis_[static_cast<std::size_t>(i)] < n_struct_) continue;
        for (int j = 0; j < n_struct_; ++j)
          if (std::abs(T_(i, j)) > tol_) {
            pivot(i, j);
            break;
          }
      }
    }

    // Phase 2 over the original cost.
    if (!run_phase(false)) throw NumericalFailure("simplex: phase 2 did not terminate");
    if (unbounded_) {
      res.status = LpStatus::Unbounded;
      return res;
    }

    res.x = VecX<Scalar>::Zero(d_);
    for (int i = 0; i < m_; ++i) {
      const int bj = basis_[static_cast<std::size_t>(i)];
      if (bj < d_)
        res.x(bj) += T_(i, cols - 1);
      else if (bj < 2 * d_)
        res.x(bj - d_) -= T_(i, cols - 1);
    }
    res.objective = c_.dot(res.x);
    res.status = LpStatus::Optimal;
    return res;
  }

 private:
  /// Rebuilds the body rows as B^{-1} [A~ | b~] from the original data and the
  /// current basis, then the objective row of the given phase on top of them.
  void recanonicalize(bool phase1) {
    MatX<Scalar> B(m_, m_);
    for (int i = 0; i < m_; ++i) B.col(i) = A0_.col(basis_[static_cast<std::size_t>(i)]);
    T_.topRows(m_) = Eigen::PartialPivLU<MatX<Scalar>>(B).solve(A0_);
    T_.row(m_).setZero();
    if (phase1) {
      for (int j = 0; j < n_art_; ++j) T_(m_, n_struct_ + j) = Scalar(1);
    } else {
      for (int j = 0; j < d_; ++j) {
        T_(m_, j) = c_(j);
        T_(m_, d_ + j) = -c_(j);
      }
    }
    for (int i = 0; i < m_; ++i) {
      const int bj = basis_[static_cast<std::size_t>(i)];
      const Scalar cb = T_(m_, bj);
      if (cb != Scalar(0)) T_.row(m_) -= cb * T_.row(i);
    }
    pivots_since_canon_ = 0;
  }

  bool run_phase(bool phase1) {
    for (int restart = 0; restart < kMaxRestarts; ++restart) {
      recanonicalize(phase1);
      if (!iterate(n_struct_, phase1)) return false;  // pivot cap
      if (pivots_since_canon_ == 0) return true;      // verdict held on refactorized data
    }
    return false;
  }

  bool iterate(int allowed_cols, bool phase1) {
    unbounded_ = false;
    const int cols = static_cast<int>(T_.cols());
    const long max_pivots = 2000l + 200l * static_cast<long>(m_ + cols);
    for (long step = 0; step < max_pivots; ++step) {
      if (pivots_since_canon_ >= kCanonInterval) recanonicalize(phase1);
      int enter = -1, leave = -1;
      Scalar best_num = Scalar(0), best_den = Scalar(1);
      for (int j = 0; j < allowed_cols; ++j) {
        if (T_(m_, j) >= -tol_) continue;
        leave = -1;
        for (int i = 0; i < m_; ++i) {
          const Scalar den = T_(i, j);
          if (den <= tol_) continue;
          const Scalar num = T_(i, cols - 1);
          if (leave < 0 || num * best_den < best_num * den ||
              (num * best_den == best_num * den &&
               basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
            leave = i;
            best_num = num;
            best_den = den;
          }
        }
        // The phase-1 objective is bounded below by zero, so a column with no
        // leaving row cannot be a true descent direction there; its reduced
        // cost is cancellation noise and the column is skipped.
        if (leave >= 0 || !phase1) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      if (leave < 0) {
        unbounded_ = true;
        return true;
      }
      pivot(leave, enter);
    }
    return false;
  }

  void pivot(int row, int col) {
    T_.row(row) /= T_(row, col);
    for (int i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const Scalar factor = T_(i, col);
      if (factor != Scalar(0)) T_.row(i) -= factor * T_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
    ++pivots_since_canon_;
  }

  static constexpr int kCanonInterval = 48;
  static constexpr int kMaxRestarts = 100;

  int d_, m_, n_struct_ = 0, n_art_ = 0;
  MatX<Scalar> T_;
  MatX<Scalar> A0_;
  VecX<Scalar> c_;
  std::vector<int> basis_;
  Scalar tol_ = Scalar(1e-9);
  bool unbounded_ = false;
  int pivots_since_canon_ = 0;
};

}  // namespace detail

/// min c'x subject to Ax <= b with free variables.
template <typename Scalar>
LpResult<Scalar> solve_lp(const VecX<Scalar>& c, const MatX<Scalar>& A, const VecX<Scalar>& b) {
  if (A.rows() != b.size() || (A.rows() > 0 && A.cols() != c.size()))
    throw DimensionMismatch("solve_lp: inconsistent dimensions");
  if (A.rows() == 0) {
    LpResult<Scalar> res;
    const bool zero_cost = c.size() == 0 || c.isZero(Scalar(0));
    res.status = zero_cost ? LpStatus::Optimal : LpStatus::Unbounded;
    res.x = VecX<Scalar>::Zero(c.size());
    return res;
  }
  // Row equilibration. Scaling a row of (A, b) by a positive factor leaves the
  // feasible set unchanged, but keeps rows with huge offsets (tiny direction
  // paired with a large constant) from swamping the phase-1 tolerance.
  MatX<Scalar> A_s = A;
  VecX<Scalar> b_s = b;
  for (Eigen::Index i = 0; i < A_s.rows(); ++i) {
    const Scalar s = std::max(A_s.row(i).template lpNorm<Eigen::Infinity>(), std::abs(b_s(i)));
    if (s > Scalar(1)) {
      A_s.row(i) /= s;
      b_s(i) /= s;
    }
  }
  detail::SimplexTableau<Scalar> tab(c, A_s, b_s);
  return tab.solve();
}

/// H-polyhedron { x : A x <= b }.
template <typename Scalar>
struct Polyhedron {
  MatX<Scalar> A;
  VecX<Scalar> b;

  int dim() const { return static_cast<int>(A.cols()); }
  int rows() const { return static_cast<int>(A.rows()); }

  void validate() const {
    if (A.rows() != b.size()) throw DimensionMismatch("Polyhedron: row count");
  }

  bool contains(const VecX<Scalar>& p, Scalar tol = Scalar(1e-9)) const {
    if (p.size() != dim()) throw DimensionMismatch("Polyhedron::contains: point size");
    for (int i = 0; i < rows(); ++i)
      if (A.row(i).dot(p) > b(i) + tol * (Scalar(1) + std::abs(b(i)))) return false;
    return true;
  }

  /// Axis-aligned box lo <= x <= hi.
  static Polyhedron box(const VecX<Scalar>& lo, const VecX<Scalar>& hi) {
    if (lo.size() != hi.size()) throw DimensionMismatch("Polyhedron::box: bound sizes");
    const int d = static_cast<int>(lo.size());
    Polyhedron p;
    p.A.setZero(2 * d, d);
    p.b.resize(2 * d);
    for (int i = 0; i < d; ++i) {
      p.A(i, i) = Scalar(1);
      p.b(i) = hi(i);
      p.A(d + i, i) = Scalar(-1);
      p.b(d + i) = -lo(i);
    }
    return p;
  }

  Polyhedron appended(const MatX<Scalar>& rows_a, const VecX<Scalar>& rows_b) const {
    if (rows_a.rows() != rows_b.size() || (rows_a.rows() > 0 && rows_a.cols() != dim()))
      throw DimensionMismatch("Polyhedron::appended: row shape");
    Polyhedron out;
    out.A.resize(A.rows() + rows_a.rows(), dim());
    out.A << A, rows_a;
    out.b.resize(b.size() + rows_b.size());
    out.b << b, rows_b;
    return out;
  }

  /// Restricts to a coordinate subspace: dims stay free, the rest is pinned.
  Polyhedron slice(const std::vector<int>& dims, const VecX<Scalar>& fixed) const {
    if (fixed.size() != dim()) throw DimensionMismatch("Polyhedron::slice: fixed size");
    VecX<Scalar> base = fixed;
    for (int c : dims) {
      if (c < 0 || c >= dim()) throw DimensionMismatch("Polyhedron::slice: dim out of range");
      base(c) = Scalar(0);
    }
    Polyhedron out;
    out.A = A(Eigen::all, dims);
    out.b = b - A * base;
    return out;
  }

  std::uint64_t checksum() const {
    std::uint64_t h = detail::fnv_seed();
    h = checksum_accumulate(h, A);
    h = checksum_accumulate(h, b);
    return h;
  }
};

using Polyhedrond = Polyhedron<double>;

namespace detail {

/// Drops rows dominated by a parallel row (same unit normal within tolerance,
/// larger normalized offset).  Branch predicates from different constraint
/// pairs can repeat the same halfspace up to fp noise, and near-duplicate
/// rows force the simplex onto near-singular pivots.  Zero rows are kept.
template <typename Scalar>
Polyhedron<Scalar> dominance_filter(const Polyhedron<Scalar>& poly) {
  const int m = poly.rows();
  std::vector<Scalar> norm(static_cast<std::size_t>(m));
  std::vector<bool> dead(static_cast<std::size_t>(m), false);
  for (int i = 0; i < m; ++i) norm[static_cast<std::size_t>(i)] = poly.A.row(i).norm();
  for (int i = 0; i < m; ++i) {
    if (dead[static_cast<std::size_t>(i)] || norm[static_cast<std::size_t>(i)] <= Scalar(1e-13))
      continue;
    for (int k = i + 1; k < m; ++k) {
      if (dead[static_cast<std::size_t>(k)] || norm[static_cast<std::size_t>(k)] <= Scalar(1e-13))
        continue;
      const Scalar cosangle = poly.A.row(i).dot(poly.A.row(k)) /
                              (norm[static_cast<std::size_t>(i)] * norm[static_cast<std::size_t>(k)]);
      if (cosangle >= Scalar(1) - Scalar(1e-12)) {
        if (poly.b(i) / norm[static_cast<std::size_t>(i)] <=
            poly.b(k) / norm[static_cast<std::size_t>(k)]) {
          dead[static_cast<std::size_t>(k)] = true;
        } else {
          dead[static_cast<std::size_t>(i)] = true;
          break;
        }
      }
    }
  }
  int kept = 0;
  for (int i = 0; i < m; ++i) kept += dead[static_cast<std::size_t>(i)] ? 0 : 1;
  if (kept == m) return poly;
  Polyhedron<Scalar> out;
  out.A.resize(kept, poly.dim());
  out.b.resize(kept);
  int q = 0;
  for (int i = 0; i < m; ++i) {
    if (dead[static_cast<std::size_t>(i)]) continue;
    out.A.row(q) = poly.A.row(i);
    out.b(q) = poly.b(i);
    ++q;
  }
  return out;
}

}  // namespace detail

template <typename Scalar>
struct ChebyshevResult {
  VecX<Scalar> center;
  /// Signed inradius: negative when the polyhedron is empty, capped at
  /// radius_cap when unbounded.
  Scalar radius = Scalar(0);
};

inline constexpr double kChebyshevRadiusCap = 1e6;

/// Deepest-point LP:  max r  s.t.  a_i'x + |a_i| r <= b_i,  r <= cap.
template <typename Scalar>
ChebyshevResult<Scalar> chebyshev_center(const Polyhedron<Scalar>& poly_in) {
  poly_in.validate();
  const Polyhedron<Scalar> poly = detail::dominance_filter(poly_in);
  const int d = poly.dim();
  std::vector<int> keep;
  for (int i = 0; i < poly.rows(); ++i) {
    const Scalar norm = poly.A.row(i).norm();
    if (norm <= Scalar(1e-13)) {
      if (poly.b(i) < Scalar(-1e-12)) {
        ChebyshevResult<Scalar> res;
        res.center = VecX<Scalar>::Zero(d);
        res.radius = Scalar(-1);
        return res;
      }
      continue;  // trivially satisfied row
    }
    keep.push_back(i);
  }

  const int mr = static_cast<int>(keep.size());
  MatX<Scalar> A(mr + 1, d + 1);
  VecX<Scalar> b(mr + 1);
  for (int p = 0; p < mr; ++p) {
    const int i = keep[static_cast<std::size_t>(p)];
    A.row(p).head(d) = poly.A.row(i);
    A(p, d) = poly.A.row(i).norm();
    b(p) = poly.b(i);
  }
  A.row(mr).setZero();
  A(mr, d) = Scalar(1);
  b(mr) = Scalar(kChebyshevRadiusCap);

  VecX<Scalar> c = VecX<Scalar>::Zero(d + 1);
  c(d) = Scalar(-1);
  auto lp = solve_lp(c, A, b);
  if (lp.status != LpStatus::Optimal)
    throw NumericalFailure("chebyshev_center: interior LP failed");
  ChebyshevResult<Scalar> res;
  res.center = lp.x.head(d);
  res.radius = lp.x(d);
  return res;
}

template <typename Scalar>
bool is_empty(const Polyhedron<Scalar>& poly, Scalar tol = Scalar(1e-12)) {
  return chebyshev_center(poly).radius < -tol;
}

/// Removes redundant rows: trivial rows, dominated parallel rows, then an
/// LP sweep that tests each remaining row against the others (with the row
/// itself relaxed by one unit so the test LP is always bounded).  Surviving
/// rows keep their original order.  Assumes a nonempty polyhedron; empty
/// input is returned unchanged.
template <typename Scalar>
Polyhedron<Scalar> reduce(const Polyhedron<Scalar>& poly_in, Scalar tol = Scalar(1e-9)) {
  poly_in.validate();
  if (poly_in.rows() == 0) return poly_in;
  if (is_empty(poly_in)) return poly_in;

  const Polyhedron<Scalar> poly = detail::dominance_filter(poly_in);
  std::vector<int> rows;
  for (int i = 0; i < poly.rows(); ++i)
    if (poly.A.row(i).norm() > Scalar(1e-13)) rows.push_back(i);

  // LP sweep.
  std::size_t at = 0;
  while (at < rows.size()) {
    const int i = rows[at];
    MatX<Scalar> A(static_cast<int>(rows.size()), poly.dim());
    VecX<Scalar> b(static_cast<int>(rows.size()));
    for (std::size_t q = 0; q < rows.size(); ++q) {
      A.row(static_cast<int>(q)) = poly.A.row(rows[q]);
      b(static_cast<int>(q)) = poly.b(rows[q]);
    }
    b(static_cast<int>(at)) += Scalar(1);  // relax the row under test
    VecX<Scalar> c = -poly.A.row(i).transpose();
    auto lp = solve_lp(c, A, b);
    const Scalar scale = Scalar(1) + std::abs(poly.b(i));
    if (lp.status == LpStatus::Optimal && -lp.objective <= poly.b(i) + tol * scale) {
      rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(at));
    } else {
      ++at;
    }
  }

  Polyhedron<Scalar> out;
  out.A.resize(static_cast<int>(rows.size()), poly.dim());
  out.b.resize(static_cast<int>(rows.size()));
  for (std::size_t q = 0; q < rows.size(); ++q) {
    out.A.row(static_cast<int>(q)) = poly.A.row(rows[q]);
    out.b(static_cast<int>(q)) = poly.b(rows[q]);
  }
  return out;
}

/// Deterministic uniform samples over an axis-aligned box; coordinates are
/// drawn per sample in coordinate order from a seeded 64-bit engine.
template <typename Scalar>
std::vector<VecX<Scalar>> sample_uniform(const VecX<Scalar>& lo, const VecX<Scalar>& hi,
                                         int count, std::uint64_t seed) {
  if (lo.size() != hi.size()) throw DimensionMismatch("sample_uniform: bound sizes");
  for (int i = 0; i < lo.size(); ++i)
    if (lo(i) > hi(i)) throw DimensionMismatch("sample_uniform: lo exceeds hi");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<VecX<Scalar>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    VecX<Scalar> p(lo.size());
    for (int i = 0; i < lo.size(); ++i)
      p(i) = lo(i) + (hi(i) - lo(i)) * static_cast<Scalar>(uni(rng));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace mpcert
