#pragma once

#include <random>

#include "mpcert/qp.hpp"
#include "mpcert/types.hpp"

namespace mpcert::testutil {

/// Strictly feasible random QP with well-conditioned SPD Hessian.
inline DenseQpd random_qp(std::mt19937_64& rng, int n, int m) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseQpd qp;
  MatXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = gauss(rng);
  qp.H = B * B.transpose() + 0.1 * n * MatXd::Identity(n, n);
  qp.f.resize(n);
  for (int i = 0; i < n; ++i) qp.f(i) = gauss(rng);
  qp.A.resize(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) qp.A(i, j) = gauss(rng);
  VecXd x_feas(n);
  for (int i = 0; i < n; ++i) x_feas(i) = 0.3 * gauss(rng);
  qp.b.resize(m);
  for (int i = 0; i < m; ++i) qp.b(i) = (qp.A.row(i) * x_feas)(0) + std::abs(gauss(rng)) + 0.01;
  return qp;
}

inline double rel_err(const MatXd& got, const MatXd& want) {
  const double scale = want.norm();
  return (got - want).norm() / (scale > 0 ? scale : 1.0);
}

}  // namespace mpcert::testutil
