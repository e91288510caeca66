#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mpcert/polyhedron.hpp"

using namespace mpcert;

namespace {

Polyhedrond poly_from(MatXd A, VecXd b) {
  Polyhedrond p;
  p.A = std::move(A);
  p.b = std::move(b);
  return p;
}

}  // namespace

TEST_CASE("lp solves a one-dimensional bound problem") {
  VecXd c = (VecXd(1) << -1).finished();
  MatXd A = (MatXd(1, 1) << 1).finished();
  VecXd b = (VecXd(1) << 3).finished();
  auto res = solve_lp(c, A, b);
  REQUIRE(res.status == LpStatus::Optimal);
  CHECK(res.x(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(res.objective == doctest::Approx(-3.0).epsilon(1e-12));
}

TEST_CASE("lp detects unbounded and infeasible problems") {
  VecXd c = (VecXd(1) << 1).finished();
  MatXd A = (MatXd(1, 1) << 1).finished();
  VecXd b = (VecXd(1) << 3).finished();
  CHECK(solve_lp(c, A, b).status == LpStatus::Unbounded);

  MatXd A2 = (MatXd(2, 1) << 1, -1).finished();
  VecXd b2 = (VecXd(2) << -1, -1).finished();
  CHECK(solve_lp(c, A2, b2).status == LpStatus::Infeasible);
}

TEST_CASE("lp handles negative right-hand sides through phase one") {
  // min x + y  s.t.  -x <= -1, -y <= -2, x + y <= 10.
  VecXd c = (VecXd(2) << 1, 1).finished();
  MatXd A = (MatXd(3, 2) << -1, 0, 0, -1, 1, 1).finished();
  VecXd b = (VecXd(3) << -1, -2, 10).finished();
  auto res = solve_lp(c, A, b);
  REQUIRE(res.status == LpStatus::Optimal);
  CHECK(res.x(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.x(1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("chebyshev center of boxes and triangles") {
  VecXd lo = (VecXd(2) << -1, -1).finished();
  VecXd hi = (VecXd(2) << 1, 1).finished();
  auto square = chebyshev_center(Polyhedrond::box(lo, hi));
  CHECK(square.radius == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(square.center(0)) < 1e-9);
  CHECK(std::abs(square.center(1)) < 1e-9);

  auto rect = chebyshev_center(
      Polyhedrond::box(VecXd(VecXd::Zero(2)), (VecXd(2) << 4, 2).finished()));
  CHECK(rect.radius == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rect.center(1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rect.center(0) >= 1.0 - 1e-9);
  CHECK(rect.center(0) <= 3.0 + 1e-9);

  auto tri = chebyshev_center(poly_from((MatXd(3, 2) << -1, 0, 0, -1, 1, 1).finished(),
                                        (VecXd(3) << 0, 0, 2).finished()));
  CHECK(tri.radius == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("chebyshev radius is negative exactly on empty polyhedra") {
  auto empty = poly_from((MatXd(2, 1) << 1, -1).finished(), (VecXd(2) << -1, -1).finished());
  CHECK(chebyshev_center(empty).radius < 0.0);
  CHECK(is_empty(empty));

  auto thin = poly_from((MatXd(2, 1) << 1, -1).finished(), (VecXd(2) << 1, -1).finished());
  CHECK(chebyshev_center(thin).radius == doctest::Approx(0.0).epsilon(1e-10));
  CHECK_FALSE(is_empty(thin));
}

TEST_CASE("chebyshev radius saturates at the cap on unbounded sets") {
  auto half = poly_from((MatXd(1, 2) << 1, 0).finished(), VecXd::Zero(1));
  CHECK(chebyshev_center(half).radius == doctest::Approx(kChebyshevRadiusCap).epsilon(1e-9));
}

TEST_CASE("zero rows are dropped or certify emptiness") {
  auto trivial = poly_from((MatXd(2, 1) << 0, 1).finished(), (VecXd(2) << 1, 2).finished());
  CHECK(chebyshev_center(trivial).radius == doctest::Approx(kChebyshevRadiusCap).epsilon(1e-6));
  auto contradiction = poly_from(MatXd::Zero(1, 1), (VecXd(1) << -1).finished());
  CHECK(is_empty(contradiction));
}

TEST_CASE("containment respects the absolute tolerance") {
  auto box = Polyhedrond::box((VecXd(2) << -1, -1).finished(), (VecXd(2) << 1, 1).finished());
  CHECK(box.contains((VecXd(2) << 1.0, 0.0).finished()));
  CHECK(box.contains((VecXd(2) << 1.0 + 1e-12, 0.0).finished()));
  CHECK_FALSE(box.contains((VecXd(2) << 1.1, 0.0).finished()));
}

TEST_CASE("reduce removes duplicated, dominated, and redundant rows") {
  // Unit box plus: parallel dominated row x <= 2, diagonal x + y <= 5, and a
  // zero row.
  MatXd A(8, 2);
  VecXd b(8);
  A << 1, 0, -1, 0, 0, 1, 0, -1, 1, 0, 1, 1, 0, 0, -1, 0;
  b << 1, 1, 1, 1, 2, 5, 3, 1;
  auto red = reduce(poly_from(A, b));
  CHECK(red.rows() == 4);
  // Order preserved: the surviving rows are the first four.
  CHECK(red.A(0, 0) == 1.0);
  CHECK(red.A(1, 0) == -1.0);
  CHECK(red.b(3) == 1.0);

  // Reduction preserves the set.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  Polyhedrond orig = poly_from(A, b);
  for (int t = 0; t < 200; ++t) {
    VecXd p = (VecXd(2) << uni(rng), uni(rng)).finished();
    CHECK(orig.contains(p) == red.contains(p));
  }
}

TEST_CASE("reduce leaves empty polyhedra unchanged") {
  auto empty = poly_from((MatXd(2, 1) << 1, -1).finished(), (VecXd(2) << -1, -1).finished());
  auto red = reduce(empty);
  CHECK(red.rows() == 2);
}

TEST_CASE("the returned center attains the reported inradius") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int nonempty = 0;
  for (int trial = 0; trial < 40; ++trial) {
    MatXd A(6, 2);
    VecXd b(6);
    for (int i = 0; i < 6; ++i) {
      A(i, 0) = gauss(rng);
      A(i, 1) = gauss(rng);
      b(i) = 1.0 + std::abs(gauss(rng));
    }
    auto poly = poly_from(A, b);
    auto cheb = chebyshev_center(poly);
    if (cheb.radius < 0) continue;
    ++nonempty;
    double min_margin = kChebyshevRadiusCap;
    for (int i = 0; i < 6; ++i)
      min_margin = std::min(min_margin, (b(i) - A.row(i).dot(cheb.center)) / A.row(i).norm());
    CHECK(cheb.radius == doctest::Approx(std::min(min_margin, kChebyshevRadiusCap)).epsilon(1e-8));
    CHECK(poly.contains(cheb.center));
  }
  CHECK(nonempty > 10);
}

TEST_CASE("slice pins coordinates") {
  auto box = Polyhedrond::box(VecXd(VecXd::Constant(3, -1.0)), VecXd(VecXd::Constant(3, 1.0)));
  VecXd fixed = (VecXd(3) << 0.0, 0.5, 0.0).finished();
  auto sl = box.slice({0, 2}, fixed);
  CHECK(sl.dim() == 2);
  CHECK(sl.contains((VecXd(2) << 0.9, -0.9).finished()));
  CHECK_FALSE(sl.contains((VecXd(2) << 1.1, 0.0).finished()));
}

TEST_CASE("uniform box sampling is deterministic and in-bounds") {
  VecXd lo = (VecXd(2) << -2, 1).finished();
  VecXd hi = (VecXd(2) << 2, 3).finished();
  auto s1 = sample_uniform(lo, hi, 5000, 42);
  auto s2 = sample_uniform(lo, hi, 5000, 42);
  auto s3 = sample_uniform(lo, hi, 5000, 43);
  REQUIRE(s1.size() == 5000);
  bool identical = true, differs = false;
  VecXd mean = VecXd::Zero(2);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    identical = identical && (s1[i] == s2[i]);
    differs = differs || (s1[i] != s3[i]);
    CHECK(s1[i](0) >= -2.0);
    CHECK(s1[i](0) <= 2.0);
    CHECK(s1[i](1) >= 1.0);
    CHECK(s1[i](1) <= 3.0);
    mean += s1[i];
  }
  mean /= 5000.0;
  CHECK(identical);
  CHECK(differs);
  CHECK(std::abs(mean(0) - 0.0) < 0.1);
  CHECK(std::abs(mean(1) - 2.0) < 0.05);

  auto degen = sample_uniform(VecXd(VecXd::Zero(1)), VecXd(VecXd::Zero(1)), 3, 1);
  CHECK(degen[2](0) == 0.0);
  CHECK_THROWS_AS(sample_uniform(hi, lo, 1, 0), DimensionMismatch);
}
