#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpcert/admm.hpp"
#include "mpcert/cert.hpp"
#include "mpcert/condense.hpp"
#include "mpcert/io.hpp"
#include "mpcert/ocp.hpp"
#include "mpcert/quadrotor.hpp"
#include "mpcert/sim.hpp"
#include "mpcert/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mpcert;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitPartial = 2;

struct GlobalOpts {
  std::string config;
  std::string out = "out";
  std::string mode = "flops";
  std::optional<std::uint64_t> seed;
  std::optional<double> budget;
  std::optional<std::string> solver;
  std::optional<int> r_preset;
  std::optional<int> workers;
  // pca-only
  std::string log_file;
  double delta = 2.0;
  int mc_samples = 100000;
  // bench-only: pre-recorded measurement files instead of live solves
  std::string tau_a, tau_b;
};

/// Flight-envelope parameter box for the 12-d quadrotor error state.
VecXd theta_box_b_upper() {
  VecXd ub(12);
  ub << 0.6, 1.0, 0.6, 0.5, 0.4, 0.25, 1.6, 3.0, 0.2, 7.0, 5.0, 0.45;
  return ub;
}

/// Everything the subcommands need, assembled from one run config.
struct Problem {
  OcpSpec<double> ocp;
  ParametricQpd family;  // full condensed family
  ParametricQpd active;  // post-slice family driving certify/bench
  Polyhedrond theta;     // in active coordinates
  std::vector<int> slice_dims;
  VecXd slice_fixed;
  QuadParams params;
  bool is_quadrotor = false;

  /// Active-coordinate parameter lifted back to the full parameter space.
  VecXd to_full(const VecXd& t) const {
    if (slice_dims.empty()) return t;
    VecXd full = slice_fixed;
    for (int c : slice_dims) full(c) = 0.0;
    for (std::size_t k = 0; k < slice_dims.size(); ++k)
      full(slice_dims[k]) = t(static_cast<int>(k));
    return full;
  }
};

Problem build_problem(const io::RunConfig& cfg) {
  Problem prob;
  if (cfg.problem == "double_integrator") {
    prob.ocp = double_integrator_ocp(cfg.horizon > 0 ? cfg.horizon : 2);
  } else if (cfg.problem == "quadrotor") {
    prob.params = default_quad_params();
    prob.ocp = quadrotor_ocp(prob.params, cfg.r_weight, cfg.horizon > 0 ? cfg.horizon : 15, cfg.dt);
    prob.is_quadrotor = true;
    if (cfg.q_diag.size() > 0) {
      if (cfg.q_diag.size() != prob.ocp.nz())
        throw io::IoError("q_diag length must match the state dimension");
      prob.ocp.Q = MatXd(cfg.q_diag.asDiagonal());
      prob.ocp.set_riccati_terminal();
    }
  } else {
    prob.ocp.F = cfg.custom.F;
    prob.ocp.G = cfg.custom.G;
    prob.ocp.Q = cfg.custom.Q;
    prob.ocp.R = cfg.custom.R;
    prob.ocp.N = cfg.horizon > 0 ? cfg.horizon : 2;
    prob.ocp.A_z = cfg.custom.Az;
    prob.ocp.A_u = cfg.custom.Au;
    prob.ocp.b_s = cfg.custom.b_s;
    if (cfg.custom.P.size() > 0)
      prob.ocp.P = cfg.custom.P;
    else
      prob.ocp.set_riccati_terminal();
  }
  prob.family = condense(prob.ocp);
  const int d = prob.family.d();

  Polyhedrond theta_full;
  const auto& tc = cfg.theta;
  if (tc.source == "box_b") {
    if (d != 12) throw io::IoError("theta.source box_b requires a 12-d parameter space");
    const VecXd ub = theta_box_b_upper();
    theta_full = Polyhedrond::box(-ub, ub);
  } else if (tc.source == "box") {
    if (tc.lo.size() > 0) {
      theta_full = Polyhedrond::box(tc.lo, tc.hi);
    } else {
      theta_full = Polyhedrond::box(VecXd::Constant(d, -tc.half_width),
                                    VecXd::Constant(d, tc.half_width));
    }
  } else if (tc.source == "pca") {
    theta_full = box_to_polyhedron(io::load_pca_box(tc.file));
  } else {
    theta_full = io::load_polyhedron(tc.file);
  }

  if (cfg.slice.active()) {
    prob.slice_dims = cfg.slice.dims;
    prob.slice_fixed = cfg.slice.fixed.size() > 0 ? cfg.slice.fixed : VecXd(VecXd::Zero(d));
    if (prob.slice_fixed.size() != d) throw io::IoError("slice.fixed length must match the parameter dimension");
    prob.active = slice(prob.family, prob.slice_dims, prob.slice_fixed);
    const int k = static_cast<int>(prob.slice_dims.size());
    if (theta_full.dim() == d)
      prob.theta = theta_full.slice(prob.slice_dims, prob.slice_fixed);
    else if (theta_full.dim() == k)
      prob.theta = theta_full;
    else
      throw io::IoError("theta dimension matches neither the full nor the sliced parameter space");
  } else {
    prob.active = prob.family;
    if (theta_full.dim() != d)
      throw io::IoError("theta dimension " + std::to_string(theta_full.dim()) +
                        " does not match the parameter dimension " + std::to_string(d));
    prob.theta = theta_full;
  }
  return prob;
}

io::RunConfig load_and_override(const GlobalOpts& opt) {
  io::RunConfig cfg = io::load_run_config(opt.config);
  if (opt.r_preset) cfg.r_weight = static_cast<double>(*opt.r_preset);
  if (opt.seed) cfg.sampling.seed = *opt.seed;
  if (opt.workers) cfg.cert.workers = *opt.workers;
  return cfg;
}

int resolve_workers(int configured) {
  if (configured > 0) return configured;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Deterministic uniform rejection sampling over a bounded polyhedron; the
/// bounding box comes from per-coordinate LPs.
std::vector<VecXd> sample_polyhedron(const Polyhedrond& poly, int count, std::uint64_t seed) {
  const int d = poly.dim();
  VecXd lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    VecXd c = VecXd::Zero(d);
    c(i) = 1.0;
    const auto mx = solve_lp(VecXd(-c), poly.A, poly.b);
    const auto mn = solve_lp(c, poly.A, poly.b);
    if (mx.status != LpStatus::Optimal || mn.status != LpStatus::Optimal)
      throw NumericalFailure("sample_polyhedron: parameter set is empty or unbounded");
    hi(i) = mx.x(i);
    lo(i) = mn.x(i);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<VecXd> out;
  out.reserve(static_cast<std::size_t>(count));
  const long long max_attempts = 10000LL * std::max(count, 1);
  long long attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > max_attempts)
      throw NumericalFailure("sample_polyhedron: rejection rate too high");
    VecXd p(d);
    for (int i = 0; i < d; ++i) p(i) = lo(i) + (hi(i) - lo(i)) * uni(rng);
    if (poly.contains(p, 0.0)) out.push_back(std::move(p));
  }
  return out;
}

void write_json(const fs::path& path, const json& j) {
  io::write_file(path.string(), j.dump(1) + "\n");
}

json vec_to_json(const VecXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// --- certify -----------------------------------------------------------------

int cmd_certify(const GlobalOpts& opt) {
  io::RunConfig cfg = load_and_override(opt);
  if (opt.budget) cfg.cert.region_budget = static_cast<long long>(*opt.budget);
  const Problem prob = build_problem(cfg);

  CertConfig ccfg;
  ccfg.region_budget = static_cast<std::uint64_t>(cfg.cert.region_budget);
  ccfg.sliver_radius = cfg.cert.sliver_radius;
  ccfg.workers = resolve_workers(cfg.cert.workers);

  const Partitiond part = certify(prob.active, prob.theta, cfg.solver, ccfg);

  fs::create_directories(opt.out);
  io::save_partition((fs::path(opt.out) / "partition.jsonl").string(), part);

  MeasurementVectord mv;
  if (opt.mode == "wallclock")
    mv = measure(part, wallclock_cost(prob.active, cfg.solver), "wallclock");
  else
    mv = measure(part, flops_cost(prob.active, cfg.solver), "flops");
  io::save_measurements((fs::path(opt.out) / "tau.csv").string(), mv, cfg.hash);

  json report;
  report["mode"] = mv.mode;
  report["config_hash"] = cfg.hash;
  report["region_count"] = static_cast<int>(part.regions.size());
  report["complete"] = part.complete;
  report["capped_regions"] = part.capped_regions;
  report["infeasible_regions"] = part.infeasible_regions;
  report["dropped_slivers"] = part.dropped_slivers;
  report["max_iterations"] = part.max_iterations;
  report["no_splits"] = part.regions.size() <= 1;
  if (!part.regions.empty()) {
    const WcetResult w = wcet(mv);
    report["wcet"] = w.value;
    report["wcet_region_id"] = w.region_id;
  }
  write_json(fs::path(opt.out) / "wcet.json", report);

  std::cout << "regions: " << part.regions.size() << " (capped " << part.capped_regions
            << ", infeasible " << part.infeasible_regions << ", slivers dropped "
            << part.dropped_slivers << ")\n";
  std::cout << "max iterations: " << part.max_iterations << "\n";
  if (!part.regions.empty())
    std::cout << "wcet (" << mv.mode << "): " << report["wcet"].get<double>() << " in region "
              << report["wcet_region_id"].get<int>() << "\n";
  if (part.regions.size() <= 1) std::cout << "no splits\n";
  if (!part.complete) std::cout << "region budget exhausted; partition is partial\n";

  return (part.complete && part.capped_regions == 0) ? kExitOk : kExitPartial;
}

// --- bench ---------------------------------------------------------------------

struct BenchRecord {
  int id = 0;
  VecXd theta;  // active coordinates
  double cost = 0;
  int iterations = 0;
  bool converged = false;
};

double time_best_of(const std::function<void()>& fn, int repeats = 3) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::micro>(t1 - t0).count());
  }
  return best;
}

MeasurementVectord to_measurements(const std::vector<BenchRecord>& recs, const std::string& mode) {
  MeasurementVectord mv;
  mv.mode = mode;
  for (const auto& r : recs) {
    mv.region_ids.push_back(r.id);
    mv.tau.push_back(r.cost);
    mv.witnesses.push_back(r.theta);
  }
  return mv;
}

void write_histogram(const fs::path& path, const std::vector<double>& values, int nbins,
                     const std::string& config_hash) {
  std::string out;
  out += "# mpcert histogram v1\n# generated=" + io::timestamp_utc() + "\n";
  out += "# config_hash=" + config_hash + " units=cost_difference\n";
  out += "bin_lo,bin_hi,count\n";
  for (const auto& b : histogram(values, nbins))
    out += io::format_double(b.lo) + "," + io::format_double(b.hi) + "," +
           std::to_string(b.count) + "\n";
  io::write_file(path.string(), out);
}

void write_cdf(const fs::path& path, const std::vector<double>& values,
               const std::string& config_hash, const std::string& units) {
  std::string out;
  out += "# mpcert cdf v1\n# generated=" + io::timestamp_utc() + "\n";
  out += "# config_hash=" + config_hash + " units=" + units + "\n";
  out += "value,cum_prob\n";
  for (const auto& p : empirical_cdf(values))
    out += io::format_double(p.value) + "," + io::format_double(p.prob) + "\n";
  io::write_file(path.string(), out);
}

int diff_report(const std::vector<double>& a, const std::vector<double>& b,
                const std::vector<int>& ids, const fs::path& out_dir,
                const std::string& config_hash, const std::string& units) {
  if (a.size() != b.size()) throw DimensionMismatch("bench: cost vectors differ in length");
  std::vector<double> diff(a.size());
  std::size_t wins = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff[k] = b[k] - a[k];
    if (a[k] < b[k]) ++wins;
  }
  {
    std::string out;
    out += "# mpcert bench_diff v1\n# generated=" + io::timestamp_utc() + "\n";
    out += "# config_hash=" + config_hash + " units=" + units + " convention=admm_minus_daqp\n";
    out += "sample_id,daqp,admm,diff\n";
    for (std::size_t k = 0; k < diff.size(); ++k)
      out += std::to_string(ids[k]) + "," + io::format_double(a[k]) + "," +
             io::format_double(b[k]) + "," + io::format_double(diff[k]) + "\n";
    io::write_file((out_dir / "bench_diff.csv").string(), out);
  }
  write_histogram(out_dir / "bench_hist.csv", diff, 30, config_hash);
  const double frac = diff.empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(diff.size());
  const auto s = summarize(diff);
  std::cout << "daqp cheaper at " << wins << "/" << diff.size() << " samples (fraction "
            << frac << ")\n";
  std::cout << "cost difference (admm - daqp): min " << s.min << ", median " << s.p50
            << ", p95 " << s.p95 << ", max " << s.max << "\n";
  return kExitOk;
}

int cmd_bench(const GlobalOpts& opt) {
  const std::string solver = opt.solver.value_or("both");

  // Pre-recorded measurement files: diff them and stop.
  if (!opt.tau_a.empty() || !opt.tau_b.empty()) {
    if (opt.tau_a.empty() || opt.tau_b.empty())
      throw io::IoError("bench: --tau-a and --tau-b must be given together");
    const auto mva = io::load_measurements(opt.tau_a);
    const auto mvb = io::load_measurements(opt.tau_b);
    fs::create_directories(opt.out);
    const std::string units = mva.mode == "wallclock" ? "microseconds" : "flops";
    return diff_report(mva.tau, mvb.tau, mva.region_ids, opt.out,
                       io::fnv1a_hex(io::read_file(opt.tau_a)), units);
  }

  io::RunConfig cfg = load_and_override(opt);
  if (opt.budget) cfg.cert.region_budget = static_cast<long long>(*opt.budget);
  const Problem prob = build_problem(cfg);
  const bool wallclock = opt.mode == "wallclock";
  const std::string units = wallclock ? "microseconds" : "flops";

  // Sample set: certified region witnesses or uniform draws over theta.
  std::vector<VecXd> thetas;
  std::vector<int> ids;
  bool partial = false;
  if (cfg.sampling.method == "certified") {
    CertConfig ccfg;
    ccfg.region_budget = static_cast<std::uint64_t>(cfg.cert.region_budget);
    ccfg.sliver_radius = cfg.cert.sliver_radius;
    ccfg.workers = resolve_workers(cfg.cert.workers);
    const Partitiond part = certify(prob.active, prob.theta, cfg.solver, ccfg);
    partial = !part.complete || part.capped_regions > 0;
    for (const auto& r : part.regions) {
      thetas.push_back(r.witness);
      ids.push_back(r.id);
    }
  } else {
    thetas = sample_polyhedron(prob.theta, cfg.sampling.count, cfg.sampling.seed);
    for (int k = 0; k < static_cast<int>(thetas.size()); ++k) ids.push_back(k);
  }
  if (thetas.empty()) throw NumericalFailure("bench: no samples (empty parameter set?)");

  fs::create_directories(opt.out);
  const bool run_daqp = solver == "daqp" || solver == "both";
  const bool run_admm = solver == "admm" || solver == "both";

  std::vector<BenchRecord> daqp_recs, admm_recs;
  std::string traces;

  if (run_daqp) {
    const DualGeometry<double> geo(prob.active.H, prob.active.A);
    for (std::size_t k = 0; k < thetas.size(); ++k) {
      const auto qp = instantiate(prob.active, thetas[k]);
      const auto trace = dual_active_set_solve(qp, cfg.solver, &geo);
      BenchRecord rec{ids[k], thetas[k], static_cast<double>(trace.flop_estimate),
                      trace.iterations, trace.status == SolveStatus::Optimal};
      if (wallclock)
        rec.cost = time_best_of([&] { (void)dual_active_set_solve(qp, cfg.solver, &geo); });
      daqp_recs.push_back(rec);
      json t;
      t["sample_id"] = ids[k];
      t["solver"] = "daqp";
      t["theta"] = vec_to_json(thetas[k]);
      t["cost"] = rec.cost;
      t["iterations"] = rec.iterations;
      t["status"] = to_string(trace.status);
      traces += t.dump() + "\n";
    }
    io::save_measurements((fs::path(opt.out) / "bench_daqp.csv").string(),
                          to_measurements(daqp_recs, opt.mode), cfg.hash);
    write_cdf(fs::path(opt.out) / "bench_cdf_daqp.csv",
              to_measurements(daqp_recs, opt.mode).tau, cfg.hash, units);
  }

  if (run_admm) {
    const auto cache = build_admm_cache(prob.ocp, cfg.admm.rho, cfg.admm.eps_primal,
                                        cfg.admm.eps_dual, cfg.admm.max_iter);
    for (std::size_t k = 0; k < thetas.size(); ++k) {
      const VecXd full = prob.to_full(thetas[k]);
      const auto trace = admm_solve(cache, full);
      BenchRecord rec{ids[k], thetas[k], static_cast<double>(trace.flop_estimate),
                      trace.iterations, trace.converged};
      if (wallclock) rec.cost = time_best_of([&] { (void)admm_solve(cache, full); });
      admm_recs.push_back(rec);
      json t;
      t["sample_id"] = ids[k];
      t["solver"] = "admm";
      t["theta"] = vec_to_json(thetas[k]);
      t["cost"] = rec.cost;
      t["iterations"] = rec.iterations;
      t["converged"] = rec.converged;
      t["r_primal"] = trace.r_primal;
      t["r_dual"] = trace.r_dual;
      traces += t.dump() + "\n";
    }
    io::save_measurements((fs::path(opt.out) / "bench_admm.csv").string(),
                          to_measurements(admm_recs, opt.mode), cfg.hash);
    write_cdf(fs::path(opt.out) / "bench_cdf_admm.csv",
              to_measurements(admm_recs, opt.mode).tau, cfg.hash, units);
  }

  io::write_file((fs::path(opt.out) / "bench_traces.jsonl").string(), traces);

  if (run_daqp && run_admm) {
    std::vector<double> a, b;
    for (const auto& r : daqp_recs) a.push_back(r.cost);
    for (const auto& r : admm_recs) b.push_back(r.cost);
    diff_report(a, b, ids, opt.out, cfg.hash, units);
  }
  std::cout << "samples: " << thetas.size() << " (" << cfg.sampling.method << ")\n";
  return partial ? kExitPartial : kExitOk;
}

// --- sim -----------------------------------------------------------------------

int cmd_sim(const GlobalOpts& opt) {
  io::RunConfig cfg = load_and_override(opt);
  if (opt.budget) cfg.sim.deadline_flops_budget = *opt.budget;
  const Problem prob = build_problem(cfg);
  if (!prob.is_quadrotor) throw io::IoError("sim requires problem = quadrotor");

  Trajectory traj = Trajectory::hover(cfg.sim.altitude_m);
  if (cfg.sim.trajectory == "step")
    traj = default_step_trajectory(cfg.sim.altitude_m);
  else if (cfg.sim.trajectory == "figure_eight")
    traj = Trajectory::figure_eight(cfg.sim.fig8_amplitude_m, cfg.sim.fig8_period_s,
                                    cfg.sim.altitude_m);

  SimOptions opts;
  opts.duration = cfg.sim.duration_s;
  opts.deadline_flops_budget = cfg.sim.deadline_flops_budget;
  opts.controller_u0_scale = cfg.sim.controller_u0_scale;

  const std::string solver = opt.solver.value_or("daqp");
  std::vector<std::string> names;
  if (solver == "daqp" || solver == "both") names.push_back("daqp");
  if (solver == "admm" || solver == "both") names.push_back("admm");

  fs::create_directories(opt.out);
  json summary;
  summary["config_hash"] = cfg.hash;
  summary["trajectory"] = traj.name();
  bool any_diverged = false;

  for (const auto& name : names) {
    ControlLaw law = name == "daqp"
                         ? make_daqp_control_law(prob.family, cfg.solver)
                         : make_admm_control_law(build_admm_cache(prob.ocp, cfg.admm.rho,
                                                                  cfg.admm.eps_primal,
                                                                  cfg.admm.eps_dual,
                                                                  cfg.admm.max_iter));
    const SimLog log = closed_loop(law, traj, prob.params, opts);
    io::save_sim_log((fs::path(opt.out) / ("sim_" + name + ".csv")).string(), log, cfg.hash);
    const StateLog states = log_error_states(log, cfg.sim.log_rate_hz);
    if (states.count() > 0)
      io::save_state_log((fs::path(opt.out) / ("state_log_" + name + ".csv")).string(), states,
                         cfg.hash);

    json s;
    VecXd rms(3);
    for (int i = 0; i < 3; ++i)
      rms(i) = log.ticks() == 0 ? 0.0 : std::sqrt(log.errors.row(i).squaredNorm() / log.ticks());
    s["rms_tracking_error_m"] = vec_to_json(rms);
    s["max_input"] = log.ticks() == 0 ? 0.0 : log.inputs.maxCoeff();
    s["max_input_deviation"] =
        log.ticks() == 0 ? 0.0
                         : (log.inputs.colwise() - prob.params.u0).cwiseAbs().maxCoeff();
    s["deadline_violations"] = log.violation_count;
    s["clamp_events"] = log.clamp_events;
    s["diverged"] = log.diverged;
    s["ticks"] = log.ticks();
    summary[name] = s;
    any_diverged = any_diverged || log.diverged;

    std::cout << name << ": rms xyz [" << rms(0) << ", " << rms(1) << ", " << rms(2)
              << "] m, violations " << log.violation_count << ", diverged "
              << (log.diverged ? "yes" : "no") << "\n";
  }
  write_json(fs::path(opt.out) / "sim_summary.json", summary);
  if (any_diverged) {
    std::cerr << "error: simulation diverged; partial logs written\n";
    return kExitError;
  }
  return kExitOk;
}

// --- pca -----------------------------------------------------------------------

int cmd_pca(const GlobalOpts& opt) {
  const StateLog log = io::load_state_log(opt.log_file);
  const std::string hash = io::fnv1a_hex(io::read_file(opt.log_file));
  const PcaBox box = build_pca_box(log, opt.delta);
  if (box.degenerate)
    std::cerr << "warning: degenerate state log (rank-deficient covariance); "
                 "basis padded with identity directions\n";

  fs::create_directories(opt.out);
  io::save_pca_box((fs::path(opt.out) / "pca_box.json").string(), box);

  int contained = 0;
  for (int k = 0; k < log.count(); ++k)
    if (contains(box, VecXd(log.samples.col(k)))) ++contained;
  const double containment = static_cast<double>(contained) / log.count();

  const std::uint64_t seed = opt.seed.value_or(1);
  const double ratio_aabb = mc_volume_ratio(box, opt.mc_samples, seed);

  json report;
  report["config_hash"] = hash;
  report["delta"] = opt.delta;
  report["dim"] = box.dim();
  report["sample_count"] = log.count();
  report["degenerate"] = box.degenerate;
  report["containment_fraction"] = containment;
  report["volume_ratio_vs_aabb"] = ratio_aabb;
  if (box.dim() == 12) {
    const auto [lo, hi] = aligned_bounds(box);
    const VecXd ub = theta_box_b_upper();
    double scale = 1.0;
    for (int i = 0; i < 12; ++i) scale *= (hi(i) - lo(i)) / (2.0 * ub(i));
    report["volume_ratio_vs_box_b"] = ratio_aabb * scale;
  }
  write_json(fs::path(opt.out) / "pca_report.json", report);

  std::cout << "pca box: dim " << box.dim() << ", delta " << opt.delta << ", containment "
            << containment << "\n";
  std::cout << "volume ratio vs axis-aligned bounding box: " << ratio_aabb << "\n";
  if (report.contains("volume_ratio_vs_box_b"))
    std::cout << "volume ratio vs flight-envelope box: "
              << report["volume_ratio_vs_box_b"].get<double>() << "\n";
  return kExitOk;
}

void add_common(CLI::App* sub, GlobalOpts& g, bool need_config) {
  auto* c = sub->add_option("--config", g.config, "run configuration JSON file");
  if (need_config) c->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", g.seed, "seed override for sampling");
  sub->add_option("--out", g.out, "output directory")->capture_default_str();
  sub->add_option("--budget", g.budget,
                  "certify/bench: region budget; sim: deadline flops budget");
  sub->add_option("--mode", g.mode, "cost model")
      ->check(CLI::IsMember({"flops", "wallclock"}))
      ->capture_default_str();
  sub->add_option("--solver", g.solver, "solver selection")
      ->check(CLI::IsMember({"daqp", "admm", "both"}));
  sub->add_option("--r-preset", g.r_preset, "input-weight preset")
      ->check(CLI::IsMember({900, 100, 50}));
  sub->add_option("--workers", g.workers, "parallel exploration workers (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parametric QP certification and benchmarking toolkit"};
  app.require_subcommand(1);
  GlobalOpts g;

  auto* certify_cmd = app.add_subcommand("certify", "partition the parameter set and report WCET");
  add_common(certify_cmd, g, true);

  auto* bench_cmd = app.add_subcommand("bench", "compare solver costs over a sample set");
  add_common(bench_cmd, g, false);
  bench_cmd->add_option("--tau-a", g.tau_a, "pre-recorded measurement CSV (side A)");
  bench_cmd->add_option("--tau-b", g.tau_b, "pre-recorded measurement CSV (side B)");

  auto* sim_cmd = app.add_subcommand("sim", "run the closed-loop quadrotor simulation");
  add_common(sim_cmd, g, true);

  auto* pca_cmd = app.add_subcommand("pca", "fit a rotated parameter box to a state log");
  add_common(pca_cmd, g, false);
  pca_cmd->add_option("--log", g.log_file, "state log CSV")->required()->check(CLI::ExistingFile);
  pca_cmd->add_option("--delta", g.delta, "bound inflation factor")->capture_default_str();
  pca_cmd->add_option("--mc-samples", g.mc_samples, "Monte-Carlo volume samples")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }

  try {
    if (certify_cmd->parsed()) return cmd_certify(g);
    if (bench_cmd->parsed()) {
      if (g.config.empty() && g.tau_a.empty())
        throw io::IoError("bench: either --config or --tau-a/--tau-b is required");
      return cmd_bench(g);
    }
    if (sim_cmd->parsed()) return cmd_sim(g);
    if (pca_cmd->parsed()) return cmd_pca(g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
