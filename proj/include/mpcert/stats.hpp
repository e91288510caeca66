#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mpcert/types.hpp"

namespace mpcert {

struct HistogramBin {
  double lo = 0;
  double hi = 0;
  std::size_t count = 0;
};

/// Equal-width histogram over [min, max]; the top edge is inclusive.
inline std::vector<HistogramBin> histogram(const std::vector<double>& values, int nbins) {
  if (nbins <= 0) throw DimensionMismatch("histogram: nbins must be positive");
  if (values.empty()) return {};
  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  double lo = *mn_it, hi = *mx_it;
  if (hi == lo) hi = lo + 1.0;  // degenerate spread: single occupied bin
  const double width = (hi - lo) / nbins;
  std::vector<HistogramBin> bins(static_cast<std::size_t>(nbins));
  for (int b = 0; b < nbins; ++b) {
    bins[static_cast<std::size_t>(b)].lo = lo + b * width;
    bins[static_cast<std::size_t>(b)].hi = lo + (b + 1) * width;
  }
  for (double v : values) {
    int b = static_cast<int>((v - lo) / width);
    b = std::clamp(b, 0, nbins - 1);
    ++bins[static_cast<std::size_t>(b)].count;
  }
  return bins;
}

struct CdfPoint {
  double value = 0;
  double prob = 0;
};

/// Right-continuous empirical distribution: prob = P(X <= value).
inline std::vector<CdfPoint> empirical_cdf(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<CdfPoint> cdf;
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    cdf.push_back({values[i], static_cast<double>(i + 1) / n});
  }
  return cdf;
}

/// Simple summary statistics used in benchmark reports.
struct Summary {
  double min = 0, max = 0, mean = 0, p50 = 0, p95 = 0, p99 = 0;
  std::size_t count = 0;
};

inline double percentile(std::vector<double> sorted, double p) {
  if (sorted.empty()) throw DimensionMismatch("percentile: empty input");
  const double idx = p * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t i0 = static_cast<std::size_t>(std::floor(idx));
  const std::size_t i1 = static_cast<std::size_t>(std::ceil(idx));
  const double frac = idx - static_cast<double>(i0);
  return sorted[i0] * (1.0 - frac) + sorted[i1] * frac;
}

inline Summary summarize(std::vector<double> values) {
  if (values.empty()) return {};
  std::sort(values.begin(), values.end());
  Summary s;
  s.count = values.size();
  s.min = values.front();
  s.max = values.back();
  double acc = 0;
  for (double v : values) acc += v;
  s.mean = acc / static_cast<double>(values.size());
  s.p50 = percentile(values, 0.50);
  s.p95 = percentile(values, 0.95);
  s.p99 = percentile(values, 0.99);
  return s;
}

}  // namespace mpcert
