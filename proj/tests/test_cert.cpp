#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mpcert/cert.hpp>
#include <mpcert/cost_model.hpp>
#include <mpcert/ocp.hpp>

#include "test_util.hpp"

using namespace mpcert;

namespace {

/// min 1/2 x^2 - 2x  s.t.  x <= theta,  x >= 0, for theta in [-1, 1].
/// For theta >= 0 the cap is active at the optimum; for theta < 0 the two
/// constraints contradict and the dual ascent detects infeasibility.
ParametricQpd one_d_family() {
  ParametricQpd pqp;
  pqp.H = MatXd::Constant(1, 1, 1.0);
  pqp.f0 = VecXd::Constant(1, -2.0);
  pqp.F_theta = MatXd::Zero(1, 1);
  pqp.A = (MatXd(2, 1) << 1.0, -1.0).finished();
  pqp.b0 = VecXd::Zero(2);
  pqp.W_theta = (MatXd(2, 1) << 1.0, 0.0).finished();
  return finalize_family(pqp);
}

ParametricQpd double_integrator_family() { return condense(double_integrator_ocp(2)); }

Polyhedrond theta_box(double half, int dim) {
  return Polyhedrond::box(VecXd(VecXd::Constant(dim, -half)), VecXd(VecXd::Constant(dim, half)));
}

RegionStatus expected_status(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return RegionStatus::Optimal;
    case SolveStatus::IterationCapReached: return RegionStatus::IterationCapReached;
    case SolveStatus::InfeasibleDetected: return RegionStatus::InfeasibleDetected;
    default: throw std::logic_error("solver failed where certification succeeded");
  }
}

/// A parameter is certified when some region containing it (within a small
/// boundary slack) predicts the solver run exactly.
bool point_certified(const Partitiond& part, const ParametricQpd& pqp, const VecXd& theta,
                     const SolverConfigd& cfg) {
  const auto trace = dual_active_set_solve(instantiate(pqp, theta), cfg);
  for (const auto& region : part.regions) {
    if (!region.poly.contains(theta, 1e-9)) continue;
    if (region.ws_sequence == trace.ws_sequence && region.iterations == trace.iterations &&
        region.status == expected_status(trace.status))
      return true;
  }
  return false;
}

const Region<double>* region_at(const Partitiond& part, const VecXd& theta) {
  for (const auto& region : part.regions)
    if (region.poly.contains(theta, 1e-12)) return &region;
  return nullptr;
}

bool same_partition(const Partitiond& a, const Partitiond& b) {
  if (a.regions.size() != b.regions.size()) return false;
  if (a.complete != b.complete) return false;
  for (std::size_t i = 0; i < a.regions.size(); ++i) {
    const auto& ra = a.regions[i];
    const auto& rb = b.regions[i];
    if (ra.path != rb.path || ra.iterations != rb.iterations || ra.status != rb.status)
      return false;
    if (ra.ws_sequence != rb.ws_sequence) return false;
    if (ra.poly.rows() != rb.poly.rows()) return false;
    if ((ra.poly.A.array() != rb.poly.A.array()).any()) return false;
    if ((ra.poly.b.array() != rb.poly.b.array()).any()) return false;
    if ((ra.witness.array() != rb.witness.array()).any()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("certify: unconstrained family yields a single optimal region") {
  ParametricQpd pqp;
  pqp.H = MatXd::Identity(2, 2);
  pqp.f0 = VecXd::Zero(2);
  pqp.F_theta = MatXd::Identity(2, 2);
  pqp.A = MatXd::Zero(0, 2);
  pqp.b0 = VecXd::Zero(0);
  pqp.W_theta = MatXd::Zero(0, 2);
  pqp = finalize_family(pqp);

  const auto part = certify(pqp, theta_box(1.0, 2));
  CHECK(part.complete);
  REQUIRE(part.regions.size() == 1);
  const auto& r = part.regions[0];
  CHECK(r.status == RegionStatus::Optimal);
  CHECK(r.iterations == 0);
  REQUIRE(r.ws_sequence.size() == 1);
  CHECK(r.ws_sequence[0].empty());
  CHECK(r.witness_radius == doctest::Approx(1.0));
  CHECK(part.max_iterations == 0);
}

TEST_CASE("certify: never-active constraint leaves the region whole") {
  ParametricQpd pqp;
  pqp.H = MatXd::Identity(1, 1);
  pqp.f0 = VecXd::Zero(1);
  pqp.F_theta = MatXd::Identity(1, 1);
  pqp.A = MatXd::Constant(1, 1, 1.0);
  pqp.b0 = VecXd::Constant(1, 100.0);
  pqp.W_theta = MatXd::Zero(1, 1);
  pqp = finalize_family(pqp);

  const auto part = certify(pqp, theta_box(1.0, 1));
  CHECK(part.complete);
  REQUIRE(part.regions.size() == 1);
  CHECK(part.regions[0].status == RegionStatus::Optimal);
  CHECK(part.regions[0].iterations == 0);
}

TEST_CASE("certify: one-dimensional family splits into optimal and infeasible cells") {
  const auto pqp = one_d_family();
  const auto part = certify(pqp, theta_box(1.0, 1));

  CHECK(part.complete);
  REQUIRE(part.regions.size() == 2);
  CHECK(part.infeasible_regions == 1);
  CHECK(part.capped_regions == 0);
  CHECK(part.max_iterations == 1);

  const auto* opt = region_at(part, VecXd(VecXd::Constant(1, 0.5)));
  REQUIRE(opt != nullptr);
  CHECK(opt->status == RegionStatus::Optimal);
  CHECK(opt->iterations == 1);
  REQUIRE(opt->ws_sequence.size() == 2);
  CHECK(opt->ws_sequence[0].empty());
  CHECK(opt->ws_sequence[1] == WorkingSet{{0}});

  const auto* inf = region_at(part, VecXd(VecXd::Constant(1, -0.5)));
  REQUIRE(inf != nullptr);
  CHECK(inf->status == RegionStatus::InfeasibleDetected);
  CHECK(inf->iterations == 1);
  CHECK(inf->ws_sequence == opt->ws_sequence);

  // The split sits at the primal tolerance boundary theta = -eps_primal.
  CHECK(opt->poly.contains(VecXd(VecXd::Constant(1, 1e-3)), 0.0));
  CHECK_FALSE(opt->poly.contains(VecXd(VecXd::Constant(1, -1e-3)), 0.0));
  CHECK(inf->poly.contains(VecXd(VecXd::Constant(1, -1e-3)), 0.0));
}

TEST_CASE("certify: double integrator partition matches a dense solve grid") {
  const auto pqp = double_integrator_family();
  const SolverConfigd cfg;
  const auto part = certify(pqp, theta_box(5.0, 2), cfg);

  CHECK(part.complete);
  CHECK(part.regions.size() >= 3);
  CHECK(part.infeasible_regions == 0);
  CHECK(part.capped_regions == 0);

  int checked = 0;
  for (int ix = 0; ix < 60; ++ix) {
    for (int iy = 0; iy < 60; ++iy) {
      VecXd theta(2);
      theta << -5.0 + 10.0 * ix / 59.0, -5.0 + 10.0 * iy / 59.0;
      CHECK(point_certified(part, pqp, theta, cfg));
      ++checked;
    }
  }
  CHECK(checked == 3600);
}

TEST_CASE("certify: witnesses reproduce the certified sequences exactly") {
  const auto pqp = double_integrator_family();
  const SolverConfigd cfg;
  const auto part = certify(pqp, theta_box(5.0, 2), cfg);

  REQUIRE(!part.regions.empty());
  for (const auto& region : part.regions) {
    const auto trace = dual_active_set_solve(instantiate(pqp, VecXd(region.witness)), cfg);
    CHECK(trace.ws_sequence == region.ws_sequence);
    CHECK(trace.iterations == region.iterations);
    CHECK(expected_status(trace.status) == region.status);
  }
}

TEST_CASE("certify: region interiors are pairwise disjoint") {
  const auto pqp = double_integrator_family();
  const auto part = certify(pqp, theta_box(5.0, 2));

  for (const auto& region : part.regions) {
    int containing = 0;
    for (const auto& other : part.regions)
      if (other.poly.contains(VecXd(region.witness), 0.0)) ++containing;
    CHECK(containing == 1);
  }
}

TEST_CASE("certify: partition covers the parameter box") {
  const auto pqp = double_integrator_family();
  const auto part = certify(pqp, theta_box(5.0, 2));

  const auto samples =
      sample_uniform(VecXd(VecXd::Constant(2, -5.0)), VecXd(VecXd::Constant(2, 5.0)), 10000, 77);
  int covered = 0;
  for (const auto& theta : samples) {
    for (const auto& region : part.regions) {
      if (region.poly.contains(theta, 1e-9)) {
        ++covered;
        break;
      }
    }
  }
  CHECK(covered == 10000);
}

TEST_CASE("certify: restricting the parameter set cannot increase the worst case") {
  const auto pqp = double_integrator_family();
  const SolverConfigd cfg;
  const auto part_big = certify(pqp, theta_box(5.0, 2), cfg);
  const auto part_small = certify(pqp, theta_box(2.0, 2), cfg);

  CHECK(part_small.max_iterations <= part_big.max_iterations);

  const auto mv_big = measure(part_big, flops_cost(pqp, cfg), "flops");
  const auto mv_small = measure(part_small, flops_cost(pqp, cfg), "flops");
  CHECK(wcet(mv_small).value <= wcet(mv_big).value);
}

TEST_CASE("measure and wcet: flop counts at witnesses match the transition cost model") {
  const auto pqp = double_integrator_family();
  const SolverConfigd cfg;
  const auto part = certify(pqp, theta_box(5.0, 2), cfg);
  const auto mv = measure(part, flops_cost(pqp, cfg), "flops");

  REQUIRE(mv.tau.size() == part.regions.size());
  for (std::size_t i = 0; i < mv.tau.size(); ++i) {
    const auto& region = part.regions[static_cast<std::size_t>(mv.region_ids[i])];
    CHECK(mv.tau[i] ==
          static_cast<double>(cost_model(region.ws_sequence, pqp.n(), pqp.m())));
  }
  const auto worst = wcet(mv);
  for (double t : mv.tau) CHECK(worst.value >= t);
  CHECK(worst.region_id >= 0);
  CHECK(part.regions[static_cast<std::size_t>(worst.region_id)].iterations == part.max_iterations);
}

TEST_CASE("certify: empty parameter set produces an empty partition") {
  const auto pqp = one_d_family();
  MatXd a(2, 1);
  a << 1.0, -1.0;
  VecXd b(2);
  b << -1.0, -1.0;  // theta <= -1 and theta >= 1 simultaneously
  const Polyhedrond empty_set{a, b};

  const auto part = certify(pqp, empty_set);
  CHECK(part.complete);
  CHECK(part.regions.empty());

  const auto mv = measure(part, flops_cost(pqp, SolverConfigd{}), "flops");
  CHECK_THROWS_AS(wcet(mv), EmptyMeasurement);
}

TEST_CASE("certify: region budget truncates exploration") {
  const auto pqp = double_integrator_family();
  const auto full = certify(pqp, theta_box(5.0, 2));
  REQUIRE(full.regions.size() >= 3);

  CertConfig ccfg;
  ccfg.region_budget = 2;
  const auto part = certify(pqp, theta_box(5.0, 2), SolverConfigd{}, ccfg);
  CHECK_FALSE(part.complete);
  CHECK(part.regions.size() >= 2);
  CHECK(part.regions.size() < full.regions.size());
}

TEST_CASE("certify: iteration cap yields capped regions that replay exactly") {
  const auto pqp = double_integrator_family();
  SolverConfigd cfg;
  cfg.max_iter = 1;
  const auto part = certify(pqp, theta_box(5.0, 2), cfg);

  CHECK(part.complete);
  CHECK(part.capped_regions > 0);
  CHECK(part.max_iterations <= 1);
  bool saw_capped = false;
  for (const auto& region : part.regions) {
    if (region.status != RegionStatus::IterationCapReached) continue;
    saw_capped = true;
    const auto trace = dual_active_set_solve(instantiate(pqp, VecXd(region.witness)), cfg);
    CHECK(trace.status == SolveStatus::IterationCapReached);
    CHECK(trace.ws_sequence == region.ws_sequence);
  }
  CHECK(saw_capped);
}

TEST_CASE("certify: worker count does not change the partition") {
  const auto pqp = double_integrator_family();
  const SolverConfigd cfg;
  CertConfig serial;
  serial.workers = 1;
  CertConfig parallel;
  parallel.workers = 3;

  const auto a = certify(pqp, theta_box(5.0, 2), cfg, serial);
  const auto b = certify(pqp, theta_box(5.0, 2), cfg, parallel);
  CHECK(same_partition(a, b));
}

TEST_CASE("certify: deterministic across repeated runs") {
  const auto pqp = double_integrator_family();
  const auto a = certify(pqp, theta_box(5.0, 2));
  const auto b = certify(pqp, theta_box(5.0, 2));
  CHECK(same_partition(a, b));
}

TEST_CASE("certify: warm start with the correct set removes all iterations") {
  const auto pqp = one_d_family();
  SolverConfigd cfg;
  cfg.initial_ws = WorkingSet{{0}};
  const auto part = certify(pqp, theta_box(1.0, 1), cfg);

  CHECK(part.complete);
  REQUIRE(part.regions.size() == 2);
  for (const auto& region : part.regions) {
    CHECK(region.iterations == 0);
    REQUIRE(region.ws_sequence.size() == 1);
    CHECK(region.ws_sequence[0] == WorkingSet{{0}});
  }
  CHECK(part.max_iterations == 0);
}

TEST_CASE("certify: warm start with a wrong set is dropped then rebuilt") {
  const auto pqp = one_d_family();
  SolverConfigd cfg;
  cfg.initial_ws = WorkingSet{{1}};
  const auto part = certify(pqp, theta_box(1.0, 1), cfg);

  CHECK(part.complete);
  REQUIRE(part.regions.size() == 2);
  for (const auto& region : part.regions) {
    CHECK(region.iterations == 2);
    REQUIRE(region.ws_sequence.size() == 3);
    CHECK(region.ws_sequence[0] == WorkingSet{{1}});
    CHECK(region.ws_sequence[1].empty());
    CHECK(region.ws_sequence[2] == WorkingSet{{0}});
  }
}

TEST_CASE("certify: warm-started double integrator matches the solve grid") {
  const auto pqp = double_integrator_family();
  SolverConfigd cfg;
  cfg.initial_ws = WorkingSet{{0}};
  const auto part = certify(pqp, theta_box(5.0, 2), cfg);

  CHECK(part.complete);
  for (int ix = 0; ix < 25; ++ix) {
    for (int iy = 0; iy < 25; ++iy) {
      VecXd theta(2);
      theta << -5.0 + 10.0 * ix / 24.0, -5.0 + 10.0 * iy / 24.0;
      CHECK(point_certified(part, pqp, theta, cfg));
    }
  }
}
