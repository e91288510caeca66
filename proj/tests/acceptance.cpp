// Acceptance suite: one binary, one verdict line per criterion, exit 0 iff
// every criterion passes.  Each check states its tolerance inline; the
// benchmark distribution for criterion 8 is written next to the binary so the
// per-witness numbers can be inspected after a run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mpcert/admm.hpp"
#include "mpcert/brute_force.hpp"
#include "mpcert/cert.hpp"
#include "mpcert/cost_model.hpp"
#include "mpcert/dual_active_set.hpp"
#include "mpcert/io.hpp"
#include "mpcert/ocp.hpp"
#include "mpcert/pca.hpp"
#include "mpcert/polyhedron.hpp"
#include "mpcert/qp.hpp"
#include "mpcert/sim.hpp"
#include "test_util.hpp"

using namespace mpcert;
using clk = std::chrono::steady_clock;

namespace {

double seconds_since(clk::time_point t0) {
  return std::chrono::duration<double>(clk::now() - t0).count();
}

std::vector<int> sorted_indices(const WorkingSet& ws) {
  std::vector<int> v = ws.indices();
  std::sort(v.begin(), v.end());
  return v;
}

RegionStatus expected_status(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return RegionStatus::Optimal;
    case SolveStatus::IterationCapReached: return RegionStatus::IterationCapReached;
    case SolveStatus::InfeasibleDetected: return RegionStatus::InfeasibleDetected;
    default: throw std::logic_error("solver failed on a certified parameter");
  }
}

/// True when some region containing theta reproduces the concrete solver run.
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

double rms_altitude_error(const SimLog& log) {
  double acc = 0;
  for (int t = 0; t < log.ticks(); ++t) acc += log.errors(2, t) * log.errors(2, t);
  return std::sqrt(acc / std::max(1, log.ticks()));
}

struct Verdict {
  bool all_ok = true;
  void report(int criterion, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
};

}  // namespace

int main(int argc, char** argv) {
  const std::string out_dir = argc > 1 ? argv[1] : "acceptance_out";
  std::filesystem::create_directories(out_dir);
  Verdict verdict;

  // ---- Criteria 1 and 2: solver-oracle equivalence and KKT property suite.
  //
  // 1,000 random strictly convex QPs with n <= 6, m <= 12.  Every Optimal
  // solve must match the subset-enumeration oracle in x* (inf-norm <= 1e-6)
  // and, on nondegenerate instances, in the optimal active set.  Every
  // Optimal result must also pass the KKT residual check at (1e-4, 1e-4).
  {
    std::mt19937_64 rng(12345);
    SolverConfigd tight;
    tight.eps_primal = tight.eps_dual = 1e-9;
    const SolverConfigd default_tol;  // library defaults

    const auto t0 = clk::now();
    int optimal = 0, x_fail = 0, as_checked = 0, as_fail = 0, kkt_fail = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 6);
      const int m = 1 + static_cast<int>(rng() % 12);
      const auto qp = testutil::random_qp(rng, n, m);

      const auto trace = dual_active_set_solve(qp, tight);
      if (trace.status != SolveStatus::Optimal) continue;
      ++optimal;

      const auto oracle = brute_force_solve(qp);
      if ((trace.x_star - oracle.x).lpNorm<Eigen::Infinity>() > 1e-6) ++x_fail;

      if (!check_kkt(qp, trace.x_star, trace.lambda_star, 1e-4, 1e-4)) ++kkt_fail;
      const auto loose = dual_active_set_solve(qp, default_tol);
      if (loose.status == SolveStatus::Optimal &&
          !check_kkt(qp, loose.x_star, loose.lambda_star, 1e-4, 1e-4))
        ++kkt_fail;

      // Degeneracy test: a zero multiplier on an active constraint or a
      // near-active slack voids the active-set uniqueness claim.
      const VecXd slack = qp.A * oracle.x - qp.b;
      bool nondegenerate = true;
      for (int i = 0; i < qp.m(); ++i) {
        const bool active = oracle.active_set.contains(i);
        if (active && oracle.lambda(i) < 1e-6) nondegenerate = false;
        if (!active && slack(i) > -1e-6) nondegenerate = false;
      }
      if (nondegenerate) {
        ++as_checked;
        if (sorted_indices(trace.active_set) != sorted_indices(oracle.active_set)) ++as_fail;
      }
    }
    const double wall = seconds_since(t0);

    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "solver-oracle equivalence: %d/1000 optimal, x* mismatches %d, "
                  "active-set mismatches %d/%d nondegenerate, %.1f s (limit 60)",
                  optimal, x_fail, as_fail, as_checked, wall);
    verdict.report(1, optimal > 0 && x_fail == 0 && as_fail == 0 && wall <= 60.0, buf);

    std::snprintf(buf, sizeof buf, "KKT property suite: %d violations at (1e-4, 1e-4) over %d optimal solves",
                  kkt_fail, optimal);
    verdict.report(2, kkt_fail == 0, buf);
  }

  // Shared desk-scale problem: double-integrator MPC, N=2, one input bound
  // pair, over Theta = [-5,5]^2.  The bound is 6 so that the saturated
  // working-set sequences live in small slivers near the corners; with a
  // tight bound the worst case would cover most of the box and random
  // sampling could never miss it, which is the phenomenon criterion 4 needs.
  const auto desk_ocp = double_integrator_ocp(2, 6.0);
  const auto desk = condense(desk_ocp);
  const SolverConfigd cfg;
  const auto theta_box =
      Polyhedrond::box(VecXd(VecXd::Constant(2, -5.0)), VecXd(VecXd::Constant(2, 5.0)));
  const auto part = certify(desk, theta_box, cfg);

  // ---- Criterion 3: partition matches concrete solver runs on a 200x200 grid.
  {
    int mismatches = 0;
    for (int i = 0; i < 200; ++i)
      for (int j = 0; j < 200; ++j) {
        VecXd theta(2);
        theta << -5.0 + 10.0 * i / 199.0, -5.0 + 10.0 * j / 199.0;
        if (!point_certified(part, desk, theta, cfg)) ++mismatches;
      }
    char buf[160];
    std::snprintf(buf, sizeof buf, "certification fidelity: %d mismatches on 200x200 grid, %zu regions, max k=%d",
                  mismatches, part.regions.size(), part.max_iterations);
    verdict.report(3, mismatches == 0, buf);
  }

  // ---- Criterion 4: sampling with M = region count underestimates the
  // certified worst case for at least one seed, and never exceeds it.
  {
    const int M = static_cast<int>(part.regions.size());
    const VecXd lo = VecXd::Constant(2, -5.0), hi = VecXd::Constant(2, 5.0);
    bool exceeded = false, strict = false;
    int strict_seed = -1;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      int sampled_max = 0;
      for (const auto& theta : sample_uniform(lo, hi, M, seed))
        sampled_max = std::max(sampled_max,
                               dual_active_set_solve(instantiate(desk, theta), cfg).iterations);
      if (sampled_max > part.max_iterations) exceeded = true;
      if (sampled_max < part.max_iterations && strict_seed < 0) {
        strict = true;
        strict_seed = static_cast<int>(seed);
      }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "sampling dominance: %d samples/seed, 10 seeds, certified max k=%d, "
                  "no exceedance=%d, first strict seed=%d",
                  M, part.max_iterations, !exceeded, strict_seed);
    verdict.report(4, !exceeded && strict, buf);
  }

  // Shared quadrotor artifacts for criteria 5-7.
  const auto params = default_quad_params();
  SimOptions sim18;
  sim18.duration = 18.0;
  double max_sim_wall = 0;
  const auto timed_sim = [&](const ControlLaw& law, const Trajectory& traj, const SimOptions& o) {
    const auto t0 = clk::now();
    auto log = closed_loop(law, traj, params, o);
    max_sim_wall = std::max(max_sim_wall, seconds_since(t0));
    return log;
  };

  // ---- Criterion 5: PCA box containment, volume advantage, and flops-mode
  // restriction monotonicity on the double-integrator analogue.
  {
    // Figure-eight quadrotor log, 20 Hz error states.
    const auto law900 = make_daqp_control_law(condense(quadrotor_ocp(params, 900.0)));
    const auto fig8 = timed_sim(law900, Trajectory::figure_eight(0.5, 6.0, 1.0), sim18);
    const StateLog quad_log = log_error_states(fig8, 20.0);

    // Double-integrator closed loop rolled with the desk problem's own MPC.
    StateLog desk_log;
    {
      std::vector<VecXd> cols;
      for (const double x0 : {3.0, -2.5, 1.5}) {
        VecXd z(2);
        z << x0, 0.0;
        for (int k = 0; k < 80; ++k) {
          cols.push_back(z);
          z = desk_ocp.F * z + desk_ocp.G * mpc_step(desk, z, desk_ocp.nu()).u0;
        }
      }
      desk_log.samples.resize(2, static_cast<int>(cols.size()));
      for (std::size_t i = 0; i < cols.size(); ++i)
        desk_log.samples.col(static_cast<int>(i)) = cols[i];
      desk_log.sample_rate_hz = 10.0;
      desk_log.source = "double_integrator_closed_loop";
    }

    // (a) Containment: every logged sample satisfies A_p z <= b_p for any delta >= 0.
    int uncontained = 0;
    for (const double delta : {0.0, 0.7, 2.0}) {
      const auto box = build_pca_box(quad_log, delta);
      for (int k = 0; k < quad_log.count(); ++k)
        if (!contains(box, VecXd(quad_log.samples.col(k)))) ++uncontained;
      const auto dbox = build_pca_box(desk_log, delta);
      for (int k = 0; k < desk_log.count(); ++k)
        if (!contains(dbox, VecXd(desk_log.samples.col(k)))) ++uncontained;
    }

    // (b) Monte-Carlo volume: the oriented box must beat its own AABB.
    const double ratio = mc_volume_ratio(build_pca_box(quad_log, 0.7), 100000, 77);

    // (c) Restriction monotonicity: certify over the PCA box of the
    // double-integrator log and compare flops-mode WCET against the full box.
    const auto pca_box = build_pca_box(desk_log, 0.0);
    const auto [plo, phi] = aligned_bounds(pca_box);
    const bool inside = plo.minCoeff() >= -5.0 && phi.maxCoeff() <= 5.0;
    const auto pca_part = certify(desk, box_to_polyhedron(pca_box), cfg);
    const double wcet_pca = wcet(measure(pca_part, flops_cost(desk, cfg), "flops")).value;
    const double wcet_box = wcet(measure(part, flops_cost(desk, cfg), "flops")).value;

    char buf[220];
    std::snprintf(buf, sizeof buf,
                  "pca construction: %d uncontained samples, MC volume ratio %.3f (< 1), "
                  "pca box inside Theta=%d, WCET %g <= %g flops",
                  uncontained, ratio, inside, wcet_pca, wcet_box);
    verdict.report(5, uncontained == 0 && ratio < 1.0 && inside && wcet_pca <= wcet_box, buf);
  }

  // ---- Criterion 6: weight sweep and deadline emulation on the step trajectory.
  {
    const auto traj = default_step_trajectory(1.0);
    const auto law900 = make_daqp_control_law(condense(quadrotor_ocp(params, 900.0)));
    const auto law100 = make_daqp_control_law(condense(quadrotor_ocp(params, 100.0)));
    const auto law50 = make_daqp_control_law(condense(quadrotor_ocp(params, 50.0)));

    const auto log900 = timed_sim(law900, traj, sim18);
    const auto log100 = timed_sim(law100, traj, sim18);
    const double rms900 = rms_altitude_error(log900);
    const double rms100 = rms_altitude_error(log100);

    // Budget calibration: observed R=900 peak cost plus 20% headroom, so the
    // R=900 loop never violates while leaving room for routine jitter.
    std::uint64_t peak900 = 0;
    for (const auto f : log900.flops) peak900 = std::max(peak900, f);
    SimOptions budgeted = sim18;
    budgeted.deadline_flops_budget = static_cast<std::uint64_t>(1.2 * static_cast<double>(peak900));

    const auto log900b = timed_sim(law900, traj, budgeted);
    const auto log50b = timed_sim(law50, traj, budgeted);

    // Diagonal descent is the final leg of the step sequence: t in [12, 16).
    int descent_violations = 0;
    for (int t = 0; t < log50b.ticks(); ++t)
      if (log50b.deadline_violation[static_cast<std::size_t>(t)] &&
          log50b.time[static_cast<std::size_t>(t)] >= 12.0 &&
          log50b.time[static_cast<std::size_t>(t)] < 16.0)
        ++descent_violations;

    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "closed loop: RMS altitude R=100 %.4f < R=900 %.4f, budget %llu flops, "
                  "R=900 violations %d, R=50 descent violations %d, max sim wall %.1f s (limit 30)",
                  rms100, rms900, static_cast<unsigned long long>(budgeted.deadline_flops_budget),
                  log900b.violation_count, descent_violations, max_sim_wall);
    verdict.report(6,
                   rms100 < rms900 && log900b.violation_count == 0 && descent_violations >= 1 &&
                       max_sim_wall <= 30.0,
                   buf);
  }

  // ---- Criterion 7: a 2% thrust-command shrink leaves a persistent altitude offset.
  {
    const auto law = make_daqp_control_law(condense(quadrotor_ocp(params)));
    SimOptions clean;
    clean.duration = 8.0;
    SimOptions shrunk = clean;
    shrunk.controller_u0_scale = 0.98;

    const auto base = timed_sim(law, Trajectory::hover(1.0), clean);
    const auto offset = timed_sim(law, Trajectory::hover(1.0), shrunk);

    double floor = 0;
    for (int t = base.ticks() / 2; t < base.ticks(); ++t)
      floor = std::max(floor, std::abs(base.errors(2, t)));
    double min_err = std::numeric_limits<double>::infinity(), max_err = 0;
    for (int t = offset.ticks() / 2; t < offset.ticks(); ++t) {
      min_err = std::min(min_err, std::abs(offset.errors(2, t)));
      max_err = std::max(max_err, std::abs(offset.errors(2, t)));
    }
    const bool persistent = min_err >= 5.0 * std::max(floor, 1e-12) && max_err <= 10.0 * min_err;

    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "static offset: noise floor %.2e m, offset in [%.2e, %.2e] m (>= 5x floor, one-sided)",
                  floor, min_err, max_err);
    verdict.report(7, persistent, buf);
  }

  // ---- Criterion 8: per-witness flop ordering against the ADMM baseline.
  {
    const auto mv = measure(part, flops_cost(desk, cfg), "flops");
    const auto cache = build_admm_cache(desk_ocp);

    int wins = 0;
    std::string csv;
    csv += "# acceptance benchmark v1\n# generated=" + io::timestamp_utc() + "\n";
    csv += "# units=flops problem=double_integrator witnesses=region_chebyshev_centers\n";
    csv += "region_id,theta_0,theta_1,daqp_flops,admm_flops,admm_minus_daqp\n";
    for (std::size_t k = 0; k < mv.region_ids.size(); ++k) {
      const double daqp_flops = mv.tau[k];
      const auto admm = admm_solve(cache, mv.witnesses[k]);
      const double admm_flops = static_cast<double>(admm.flop_estimate);
      if (daqp_flops < admm_flops) ++wins;
      csv += std::to_string(mv.region_ids[k]) + ',' + io::format_double(mv.witnesses[k](0)) +
             ',' + io::format_double(mv.witnesses[k](1)) + ',' + io::format_double(daqp_flops) +
             ',' + io::format_double(admm_flops) + ',' +
             io::format_double(admm_flops - daqp_flops) + '\n';
    }
    const std::string csv_path = out_dir + "/benchmark_distribution.csv";
    io::write_file(csv_path, csv);

    const int total = static_cast<int>(mv.region_ids.size());
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "cross-solver ordering: daqp cheaper at %d/%d witnesses (need >= 90%%), distribution in %s",
                  wins, total, csv_path.c_str());
    verdict.report(8, total > 0 && wins * 10 >= total * 9, buf);
  }

  std::printf("%s\n", verdict.all_ok ? "ACCEPTANCE: all criteria passed"
                                     : "ACCEPTANCE: at least one criterion failed");
  return verdict.all_ok ? 0 : 1;
}
