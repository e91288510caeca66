#pragma once

#include <string>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mpcert/polyhedron.hpp"
#include "mpcert/types.hpp"

namespace mpcert {

/// Logged error states: one column per sample.
struct StateLog {
  MatXd samples;  // n x K
  double sample_rate_hz = 20.0;
  std::string source = "simulation";

  int dim() const { return static_cast<int>(samples.rows()); }
  int count() const { return static_cast<int>(samples.cols()); }

  void validate() const {
    if (count() < 2) throw DimensionMismatch("StateLog: need at least two samples");
    if (!samples.allFinite()) throw NumericalFailure("StateLog: non-finite sample");
  }
};

/// Rotated hyper-rectangle fitted to logged data: the principal directions of
/// the centered samples form the basis, the box spans the rotated coordinate
/// range, optionally inflated by a relative margin delta per side.
struct PcaBox {
  MatXd U;      // n x n orthonormal principal basis
  VecXd mu;     // sample mean
  VecXd z_lo;   // rotated-coordinate minima (uninflated)
  VecXd z_hi;   // rotated-coordinate maxima (uninflated)
  double delta = 0.0;
  MatXd A_p;    // [U^T; -U^T]
  VecXd b_p;    // inflated bounds shifted by the mean
  /// Set when the samples were all identical; the basis then defaults to
  /// identity and the box has zero width.
  bool degenerate = false;

  int dim() const { return static_cast<int>(U.rows()); }
};

namespace detail {

/// Deterministic sign convention: each basis column is flipped so its
/// largest-magnitude entry (first on ties) is positive.
inline void fix_column_signs(MatXd& U) {
  for (int c = 0; c < U.cols(); ++c) {
    int imax = 0;
    for (int r = 1; r < U.rows(); ++r)
      if (std::abs(U(r, c)) > std::abs(U(imax, c))) imax = r;
    if (U(imax, c) < 0) U.col(c) = -U.col(c);
  }
}

}  // namespace detail

inline PcaBox build_pca_box(const StateLog& log, double delta) {
  log.validate();
  if (delta < 0) throw DimensionMismatch("build_pca_box: delta must be nonnegative");
  const int n = log.dim();

  PcaBox box;
  box.delta = delta;
  box.mu = log.samples.rowwise().mean();
  MatXd centered = log.samples.colwise() - box.mu;

  const double scale = centered.template lpNorm<Eigen::Infinity>();
  if (scale <= 1e-13 * (1.0 + box.mu.template lpNorm<Eigen::Infinity>())) {
    box.U = MatXd::Identity(n, n);
    box.degenerate = true;
  } else {
    Eigen::BDCSVD<MatXd> svd(centered, Eigen::ComputeFullU);
    box.U = svd.matrixU();
    detail::fix_column_signs(box.U);
  }

  MatXd rotated = box.U.transpose() * centered;  // n x K
  box.z_lo = rotated.rowwise().minCoeff();
  box.z_hi = rotated.rowwise().maxCoeff();

  const VecXd width = box.z_hi - box.z_lo;
  const VecXd hi_infl = box.z_hi + delta * width;
  const VecXd lo_infl = box.z_lo - delta * width;

  box.A_p.resize(2 * n, n);
  box.A_p.topRows(n) = box.U.transpose();
  box.A_p.bottomRows(n) = -box.U.transpose();
  const VecXd mu_rot = box.U.transpose() * box.mu;
  box.b_p.resize(2 * n);
  box.b_p.head(n) = hi_infl + mu_rot;
  box.b_p.tail(n) = -(lo_infl + mu_rot);
  return box;
}

inline bool contains(const PcaBox& box, const VecXd& z) {
  if (z.size() != box.dim()) throw DimensionMismatch("PcaBox contains: point dimension");
  const VecXd slack = box.A_p * z - box.b_p;
  for (int i = 0; i < slack.size(); ++i)
    if (slack(i) > 1e-12 * (1.0 + std::abs(box.b_p(i)))) return false;
  return true;
}

inline Polyhedrond box_to_polyhedron(const PcaBox& box) { return Polyhedrond{box.A_p, box.b_p}; }

/// Tight axis-aligned bounds of the rotated box, by interval arithmetic over
/// z = mu + U * ztilde with ztilde in the inflated range.
inline std::pair<VecXd, VecXd> aligned_bounds(const PcaBox& box) {
  const int n = box.dim();
  const VecXd width = box.z_hi - box.z_lo;
  const VecXd hi_infl = box.z_hi + box.delta * width;
  const VecXd lo_infl = box.z_lo - box.delta * width;
  VecXd lo = box.mu, hi = box.mu;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = box.U(i, j);
      if (u >= 0) {
        hi(i) += u * hi_infl(j);
        lo(i) += u * lo_infl(j);
      } else {
        hi(i) += u * lo_infl(j);
        lo(i) += u * hi_infl(j);
      }
    }
  }
  return {lo, hi};
}

/// Fraction of points uniform in the axis-aligned bounding box that land
/// inside the rotated box; equals the volume ratio in expectation.
inline double mc_volume_ratio(const PcaBox& box, int samples, std::uint64_t seed) {
  if (samples < 1) throw DimensionMismatch("mc_volume_ratio: samples must be positive");
  auto [lo, hi] = aligned_bounds(box);
  const auto pts = sample_uniform(lo, hi, samples, seed);
  int inside = 0;
  for (const auto& p : pts)
    if (contains(box, p)) ++inside;
  return static_cast<double>(inside) / static_cast<double>(samples);
}

}  // namespace mpcert
