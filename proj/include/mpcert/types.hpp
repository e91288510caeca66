#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>

namespace mpcert {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatXd = MatX<double>;
using VecXd = VecX<double>;

/// Thrown when matrix/vector dimensions are inconsistent.
struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a factorization or inner solve fails numerically.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void fnv_accumulate(std::uint64_t& h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= static_cast<std::uint64_t>(p[i]);
    h *= 1099511628211ull;
  }
}

inline std::uint64_t fnv_seed() { return 14695981039346656037ull; }

}  // namespace detail

/// FNV-1a checksum of a matrix, including its dimensions.
template <typename Derived>
std::uint64_t checksum_accumulate(std::uint64_t h, const Eigen::MatrixBase<Derived>& m) {
  const std::int64_t rows = m.rows(), cols = m.cols();
  detail::fnv_accumulate(h, &rows, sizeof(rows));
  detail::fnv_accumulate(h, &cols, sizeof(cols));
  for (std::int64_t j = 0; j < cols; ++j)
    for (std::int64_t i = 0; i < rows; ++i) {
      const double v = static_cast<double>(m(i, j));
      detail::fnv_accumulate(h, &v, sizeof(v));
    }
  return h;
}

}  // namespace mpcert
