#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mpcert/admm.hpp"
#include "mpcert/condense.hpp"
#include "mpcert/dual_active_set.hpp"
#include "mpcert/pca.hpp"
#include "mpcert/quadrotor.hpp"

namespace mpcert {

/// Position reference generator.  Step sequences jump between held
/// waypoints; the figure eight is a planar lemniscate at fixed altitude.
struct Waypoint {
  Eigen::Vector3d position;
  double hold_seconds;
};

class Trajectory {
 public:
  static Trajectory hover(double altitude) {
    Trajectory t;
    t.kind_ = Kind::Hover;
    t.altitude_ = altitude;
    t.name_ = "hover";
    return t;
  }

  static Trajectory step_sequence(std::vector<Waypoint> waypoints) {
    if (waypoints.empty()) throw DimensionMismatch("Trajectory: empty waypoint list");
    for (const auto& w : waypoints)
      if (!(w.hold_seconds > 0)) throw DimensionMismatch("Trajectory: nonpositive hold");
    Trajectory t;
    t.kind_ = Kind::Steps;
    t.waypoints_ = std::move(waypoints);
    t.name_ = "step";
    return t;
  }

  static Trajectory figure_eight(double amplitude, double period, double altitude) {
    if (!(amplitude > 0) || !(period > 0))
      throw DimensionMismatch("Trajectory: figure eight needs positive amplitude and period");
    Trajectory t;
    t.kind_ = Kind::FigureEight;
    t.amplitude_ = amplitude;
    t.period_ = period;
    t.altitude_ = altitude;
    t.name_ = "figure_eight";
    return t;
  }

  Eigen::Vector3d position(double t) const {
    switch (kind_) {
      case Kind::Hover:
        return {0.0, 0.0, altitude_};
      case Kind::Steps: {
        double acc = 0.0;
        for (const auto& w : waypoints_) {
          acc += w.hold_seconds;
          if (t < acc) return w.position;
        }
        return waypoints_.back().position;
      }
      case Kind::FigureEight: {
        const double phase = 2.0 * M_PI * t / period_;
        return {amplitude_ * std::sin(phase), amplitude_ * std::sin(phase) * std::cos(phase),
                altitude_};
      }
    }
    return Eigen::Vector3d::Zero();
  }

  const std::string& name() const { return name_; }

 private:
  enum class Kind { Hover, Steps, FigureEight };
  Kind kind_ = Kind::Hover;
  std::vector<Waypoint> waypoints_;
  double amplitude_ = 0.0, period_ = 1.0, altitude_ = 1.0;
  std::string name_;
};

/// The three-step waypoint pattern: +x, then +z, then a diagonal return to
/// the start, each held for 4 s.
inline Trajectory default_step_trajectory(double altitude = 1.0) {
  return Trajectory::step_sequence({{{0.0, 0.0, altitude}, 4.0},
                                    {{1.0, 0.0, altitude}, 4.0},
                                    {{1.0, 0.0, altitude + 0.5}, 4.0},
                                    {{0.0, 0.0, altitude}, 4.0}});
}

struct ControlDecision {
  Eigen::Vector4d u = Eigen::Vector4d::Zero();  // hover-relative input
  std::uint64_t flops = 0;
  int iterations = 0;
  bool converged = true;
};

using ControlLaw = std::function<ControlDecision(const VecXd& z_e)>;

/// Condensed-QP controller backed by the dual active-set solver with a
/// cached dual factorization (the per-tick flop model assumes the cache).
inline ControlLaw make_daqp_control_law(ParametricQpd pqp, SolverConfigd cfg = {}) {
  auto geo = std::make_shared<DualGeometry<double>>(pqp.H, pqp.A);
  return [pqp = std::move(pqp), cfg, geo](const VecXd& z_e) {
    const auto trace = dual_active_set_solve(instantiate(pqp, z_e), cfg, geo.get());
    ControlDecision d;
    d.u = trace.x_star.head(4);
    d.flops = trace.flop_estimate;
    d.iterations = trace.iterations;
    d.converged = trace.status == SolveStatus::Optimal;
    return d;
  };
}

/// First-order ADMM controller over the same OCP.
inline ControlLaw make_admm_control_law(AdmmCached cache) {
  return [cache = std::move(cache)](const VecXd& z_e) {
    const auto trace = admm_solve(cache, z_e);
    ControlDecision d;
    d.u = trace.u.head(4);
    d.flops = trace.flop_estimate;
    d.iterations = trace.iterations;
    d.converged = trace.converged;
    return d;
  };
}

struct SimOptions {
  double duration = 18.0;
  double controller_rate_hz = 500.0;
  double sim_rate_hz = 1000.0;
  /// Per-tick flop budget; 0 disables deadline emulation.  On a violation
  /// the previous command is held for the tick.
  std::uint64_t deadline_flops_budget = 0;
  double divergence_bound = 50.0;  // meters
  /// Multiplies the hover command inside the controller's motor map only
  /// (the plant keeps the true hover command); models actuator miscalibration.
  double controller_u0_scale = 1.0;
};

/// Closed-loop record sampled at the controller rate.
struct SimLog {
  std::vector<double> time;
  MatXd states;   // 13 x T: p, V, quaternion (w,x,y,z), omega
  MatXd errors;   // 12 x T: error state fed to the controller
  MatXd inputs;   // 4 x T: applied normalized commands
  std::vector<std::uint8_t> deadline_violation;
  std::vector<std::uint64_t> flops;
  std::vector<int> iterations;
  double controller_rate_hz = 500.0;
  bool diverged = false;
  int clamp_events = 0;
  int violation_count = 0;

  int ticks() const { return static_cast<int>(time.size()); }
};

inline VecXd pack_state(const QuadState& s) {
  VecXd x(13);
  x.segment<3>(0) = s.p;
  x.segment<3>(3) = s.V;
  x(6) = s.q.w();
  x(7) = s.q.x();
  x(8) = s.q.y();
  x(9) = s.q.z();
  x.segment<3>(10) = s.omega;
  return x;
}

/// Simulates the nonlinear plant under the given control law with zero-order
/// hold between control ticks.  Returns early with diverged = true (partial
/// log intact) when the position leaves the divergence bound.
inline SimLog closed_loop(const ControlLaw& controller, const Trajectory& traj,
                          const QuadParams& params, const SimOptions& opts,
                          const QuadState* initial = nullptr) {
  params.validate();
  if (!(opts.duration > 0)) throw DimensionMismatch("closed_loop: duration must be positive");
  const double ratio = opts.sim_rate_hz / opts.controller_rate_hz;
  const int substeps = static_cast<int>(std::lround(ratio));
  if (substeps < 1 || std::abs(ratio - substeps) > 1e-9)
    throw DimensionMismatch("closed_loop: controller rate must divide simulation rate");

  const double dt = 1.0 / opts.sim_rate_hz;
  const int total_ticks = static_cast<int>(std::lround(opts.duration * opts.controller_rate_hz));

  QuadState state;
  if (initial) {
    state = *initial;
  } else {
    state.p = traj.position(0.0);
  }

  SimLog log;
  log.controller_rate_hz = opts.controller_rate_hz;
  log.time.reserve(static_cast<std::size_t>(total_ticks));
  log.states.resize(13, total_ticks);
  log.errors.resize(12, total_ticks);
  log.inputs.resize(4, total_ticks);

  const Eigen::Vector4d u0_ctrl = opts.controller_u0_scale * params.u0;
  Eigen::Vector4d u_m = params.u0;

  for (int tick = 0; tick < total_ticks; ++tick) {
    const double t = tick / opts.controller_rate_hz;
    const VecXd z_e = error_state(state, traj.position(t));
    const auto decision = controller(z_e);

    const bool violated =
        opts.deadline_flops_budget > 0 && decision.flops > opts.deadline_flops_budget;
    if (!violated) {
      const auto cmd = motor_map(decision.u, u0_ctrl);
      u_m = cmd.u_m;
      if (cmd.clamped) ++log.clamp_events;
    }  // else: hold the previous command for this tick

    log.time.push_back(t);
    log.states.col(tick) = pack_state(state);
    log.errors.col(tick) = z_e;
    log.inputs.col(tick) = u_m;
    log.deadline_violation.push_back(violated ? 1 : 0);
    log.flops.push_back(decision.flops);
    log.iterations.push_back(decision.iterations);
    if (violated) ++log.violation_count;

    for (int s = 0; s < substeps; ++s) state = dynamics_step(state, u_m, params, dt);

    if (state.p.norm() > opts.divergence_bound) {
      log.diverged = true;
      const int kept = tick + 1;
      log.states.conservativeResize(13, kept);
      log.errors.conservativeResize(12, kept);
      log.inputs.conservativeResize(4, kept);
      break;
    }
  }
  return log;
}

/// Downsamples the logged error states for region fitting.
inline StateLog log_error_states(const SimLog& sim, double rate_hz) {
  if (!(rate_hz > 0) || rate_hz > sim.controller_rate_hz)
    throw DimensionMismatch("log_error_states: rate must be in (0, controller rate]");
  const double ratio = sim.controller_rate_hz / rate_hz;
  const int stride = static_cast<int>(std::lround(ratio));
  if (std::abs(ratio - stride) > 1e-9)
    throw DimensionMismatch("log_error_states: rate must divide the controller rate");

  const int count = (sim.ticks() + stride - 1) / stride;
  StateLog out;
  out.samples.resize(12, count);
  for (int i = 0; i < count; ++i) out.samples.col(i) = sim.errors.col(i * stride);
  out.sample_rate_hz = rate_hz;
  out.source = "simulation";
  return out;
}

}  // namespace mpcert
