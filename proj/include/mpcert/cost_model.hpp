#pragma once

#include <cstdint>
#include <vector>

#include "mpcert/qp.hpp"
#include "mpcert/types.hpp"

namespace mpcert {

/// Deterministic flop model of a dual active-set solve, evaluated from the
/// working-set sequence alone.  Counts multiply-adds as two flops.
///
///   setup            2n^2 + 2mn + m        unconstrained solve + dual gradient
///   final recovery   2n^2 + 2mn + n        x = -H^{-1}(f + A' lambda)
///   per iteration    2w^2 + 2mw + 3m + 7w + 2   step geometry, ratio test,
///                                              multiplier and gradient update
///   addition         w^2 + w + 1           factor column append
///   removal at p     3(w-p)^2 + w          column shift + Givens sweep
///
/// where w is the working-set size before the change and p the position of
/// the removed entry.  Parameter-independent precomputation (Cholesky of H,
/// Mfac, D) is excluded: it is shared across all instances of a parametric
/// family and not part of the online cost.
inline std::uint64_t cost_model_setup(int n, int m) {
  const std::uint64_t un = static_cast<std::uint64_t>(n), um = static_cast<std::uint64_t>(m);
  return 2 * un * un + 2 * um * un + um;
}

inline std::uint64_t cost_model_final(int n, int m) {
  const std::uint64_t un = static_cast<std::uint64_t>(n), um = static_cast<std::uint64_t>(m);
  return 2 * un * un + 2 * um * un + un;
}

inline std::uint64_t cost_model_iteration(int w_before, int m, bool is_addition,
                                          int removal_pos) {
  const std::uint64_t w = static_cast<std::uint64_t>(w_before);
  const std::uint64_t um = static_cast<std::uint64_t>(m);
  std::uint64_t c = 2 * w * w + 2 * um * w + 3 * um + 7 * w + 2;
  if (is_addition) {
    c += w * w + w + 1;
  } else {
    const std::uint64_t d = static_cast<std::uint64_t>(w_before - removal_pos);
    c += 3 * d * d + w;
  }
  return c;
}

inline std::uint64_t cost_model(const std::vector<WorkingSet>& ws_sequence, int n, int m) {
  std::uint64_t total = cost_model_setup(n, m) + cost_model_final(n, m);
  for (std::size_t t = 0; t + 1 < ws_sequence.size(); ++t) {
    const WorkingSet& prev = ws_sequence[t];
    const WorkingSet& next = ws_sequence[t + 1];
    if (next.size() == prev.size() + 1) {
      total += cost_model_iteration(prev.size(), m, true, 0);
    } else if (next.size() + 1 == prev.size()) {
      int pos = 0;
      for (int p = 0; p < prev.size(); ++p)
        if (!next.contains(prev[p])) {
          pos = p;
          break;
        }
      total += cost_model_iteration(prev.size(), m, false, pos);
    } else {
      throw DimensionMismatch("cost_model: sequence steps must change one index");
    }
  }
  return total;
}

}  // namespace mpcert
