#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "mpcert/ocp.hpp"
#include "mpcert/riccati.hpp"
#include "mpcert/types.hpp"

namespace mpcert {

/// Thrown by the attitude chart near 180-degree rotations.
struct NearSingularAttitude : NumericalFailure {
  using NumericalFailure::NumericalFailure;
};

/// Rigid-body state: inertial position/velocity, body-to-inertial attitude
/// quaternion, body angular velocity.
struct QuadState {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d V = Eigen::Vector3d::Zero();
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
};

/// Nano-quadrotor physical constants.  Thrust per motor is kT * u_m with
/// u_m the normalized PWM command in [0, 1]; kQ maps the same command to
/// yaw drag torque.  Defaults are nominal Crazyflie-class values.
struct QuadParams {
  double mass = 0.029;                                        // kg
  Eigen::Vector3d inertia{1.43e-5, 1.43e-5, 2.17e-5};         // kg m^2 (diagonal)
  double arm = 0.046;                                         // m, center to motor
  double kT = 0.1422;                                         // N per unit command
  double kQ = 0.006 * 0.1422;                                 // N m per unit command
  double gravity = 9.81;                                      // m/s^2
  Eigen::Vector4d u0 = Eigen::Vector4d::Zero();               // hover command

  void validate() const {
    if (!(mass > 0) || !(arm > 0) || !(kT > 0) || !(kQ > 0) || !(gravity > 0))
      throw DimensionMismatch("QuadParams: nonpositive constant");
    if (!(inertia.minCoeff() > 0)) throw DimensionMismatch("QuadParams: nonpositive inertia");
    const double total = kT * u0.sum();
    if (std::abs(total - mass * gravity) > 1e-9)
      throw DimensionMismatch("QuadParams: hover command does not balance gravity");
  }
};

/// Defaults with the hover command solved from the thrust balance.
inline QuadParams default_quad_params() {
  QuadParams params;
  params.u0 = Eigen::Vector4d::Constant(params.mass * params.gravity / (4.0 * params.kT));
  return params;
}

/// Cross-configuration motor mixing: roll/pitch arms at arm/sqrt(2), yaw
/// from alternating rotor drag.
inline Eigen::Vector3d body_torque(const Eigen::Vector4d& u_m, const QuadParams& params) {
  const double l = params.arm / std::sqrt(2.0);
  const double kTl = params.kT * l;
  return {kTl * (u_m(0) - u_m(1) - u_m(2) + u_m(3)),
          kTl * (-u_m(0) - u_m(1) + u_m(2) + u_m(3)),
          params.kQ * (-u_m(0) + u_m(1) - u_m(2) + u_m(3))};
}

namespace detail {

struct QuadDerivative {
  Eigen::Vector3d dp, dV, domega;
  Eigen::Vector4d dq;  // (w, x, y, z) component rates
};

inline QuadDerivative quad_dynamics(const Eigen::Vector3d& V, const Eigen::Quaterniond& q_raw,
                                    const Eigen::Vector3d& omega, const Eigen::Vector4d& u_m,
                                    const QuadParams& params) {
  const Eigen::Quaterniond q = q_raw.normalized();
  QuadDerivative d;
  d.dp = V;
  const double thrust = params.kT * u_m.sum();
  d.dV = Eigen::Vector3d(0, 0, -params.gravity) +
         q * Eigen::Vector3d(0, 0, thrust / params.mass);
  const Eigen::Quaterniond omega_quat(0.0, omega.x(), omega.y(), omega.z());
  const Eigen::Quaterniond qdot = q * omega_quat;
  d.dq = 0.5 * Eigen::Vector4d(qdot.w(), qdot.x(), qdot.y(), qdot.z());
  const Eigen::Vector3d J = params.inertia;
  const Eigen::Vector3d Jw = J.cwiseProduct(omega);
  d.domega = (body_torque(u_m, params) - omega.cross(Jw)).cwiseQuotient(J);
  return d;
}

}  // namespace detail

/// One RK4 step of the rigid-body dynamics; the quaternion is renormalized
/// after the step.  Commands outside [0, 1] are clamped.
inline QuadState dynamics_step(const QuadState& state, const Eigen::Vector4d& u_m_in,
                               const QuadParams& params, double dt) {
  if (!(dt > 0.0) || dt > 0.01) throw DimensionMismatch("dynamics_step: dt outside (0, 0.01]");
  const Eigen::Vector4d u_m = u_m_in.cwiseMax(0.0).cwiseMin(1.0);

  using detail::quad_dynamics;
  const Eigen::Vector4d q0(state.q.w(), state.q.x(), state.q.y(), state.q.z());
  auto as_quat = [](const Eigen::Vector4d& v) {
    return Eigen::Quaterniond(v(0), v(1), v(2), v(3));
  };

  const auto k1 = quad_dynamics(state.V, state.q, state.omega, u_m, params);
  const auto k2 = quad_dynamics(state.V + 0.5 * dt * k1.dV, as_quat(q0 + 0.5 * dt * k1.dq),
                                state.omega + 0.5 * dt * k1.domega, u_m, params);
  const auto k3 = quad_dynamics(state.V + 0.5 * dt * k2.dV, as_quat(q0 + 0.5 * dt * k2.dq),
                                state.omega + 0.5 * dt * k2.domega, u_m, params);
  const auto k4 = quad_dynamics(state.V + dt * k3.dV, as_quat(q0 + dt * k3.dq),
                                state.omega + dt * k3.domega, u_m, params);

  QuadState next;
  next.p = state.p + dt / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
  next.V = state.V + dt / 6.0 * (k1.dV + 2.0 * k2.dV + 2.0 * k3.dV + k4.dV);
  const Eigen::Vector4d q_next = q0 + dt / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
  next.q = as_quat(q_next).normalized();
  next.omega = state.omega + dt / 6.0 * (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega);
  return next;
}

inline Eigen::Vector3d quaternion_to_rodrigues(const Eigen::Quaterniond& q) {
  if (std::abs(q.w()) < 1e-6)
    throw NearSingularAttitude("quaternion_to_rodrigues: attitude near 180 degrees");
  return q.vec() / q.w();
}

inline Eigen::Quaterniond rodrigues_to_quaternion(const Eigen::Vector3d& r) {
  const double scale = 1.0 / std::sqrt(1.0 + r.squaredNorm());
  return Eigen::Quaterniond(scale, scale * r.x(), scale * r.y(), scale * r.z());
}

struct MotorCommand {
  Eigen::Vector4d u_m;
  bool clamped = false;
};

/// Normalized PWM from a hover-relative input: u_m = clamp(u0 + u, 0, 1).
inline MotorCommand motor_map(const Eigen::Vector4d& u, const Eigen::Vector4d& u0) {
  MotorCommand cmd;
  const Eigen::Vector4d raw = u0 + u;
  cmd.u_m = raw.cwiseMax(0.0).cwiseMin(1.0);
  cmd.clamped = (raw.array() < 0.0).any() || (raw.array() > 1.0).any();
  return cmd;
}

/// 12-dimensional error state [p - p_ref; V; rodrigues(q); omega].
inline VecXd error_state(const QuadState& state, const Eigen::Vector3d& p_ref) {
  VecXd z(12);
  z.segment<3>(0) = state.p - p_ref;
  z.segment<3>(3) = state.V;
  z.segment<3>(6) = quaternion_to_rodrigues(state.q);
  z.segment<3>(9) = state.omega;
  return z;
}

/// Inverse of error_state: a full state whose error relative to p_ref is z.
inline QuadState from_error_state(const VecXd& z, const Eigen::Vector3d& p_ref) {
  if (z.size() != 12) throw DimensionMismatch("from_error_state: needs a 12-vector");
  QuadState state;
  state.p = p_ref + z.segment<3>(0);
  state.V = z.segment<3>(3);
  state.q = rodrigues_to_quaternion(Eigen::Vector3d(z.segment<3>(6)));
  state.omega = z.segment<3>(9);
  return state;
}

/// Exact zero-order-hold discretization of the hover linearization in the
/// [p, V, rodrigues, omega] chart.  The continuous-time system matrix is
/// nilpotent (kinematic chains only), so the matrix exponential series
/// terminates after the cubic term.
inline std::pair<MatXd, MatXd> linearize_hover(const QuadParams& params, double dt) {
  params.validate();
  if (!(dt > 0.0)) throw DimensionMismatch("linearize_hover: dt must be positive");
  const double g = params.gravity;

  MatXd Ac = MatXd::Zero(12, 12);
  Ac.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
  // Thrust tilt: small rotations act as I + 2 [r]_x on the body z-axis.
  Ac(3, 7) = 2.0 * g;
  Ac(4, 6) = -2.0 * g;
  Ac.block<3, 3>(6, 9) = 0.5 * Eigen::Matrix3d::Identity();

  MatXd Bc = MatXd::Zero(12, 4);
  Bc.row(5) = Eigen::RowVector4d::Constant(params.kT / params.mass);
  const double l = params.arm / std::sqrt(2.0);
  const double kTl = params.kT * l;
  Eigen::Matrix<double, 3, 4> torque_map;
  torque_map << kTl, -kTl, -kTl, kTl,
               -kTl, -kTl, kTl, kTl,
               -params.kQ, params.kQ, -params.kQ, params.kQ;
  Bc.bottomRows(3) = params.inertia.cwiseInverse().asDiagonal() * torque_map;

  const MatXd A2 = Ac * Ac;
  const MatXd A3 = A2 * Ac;
  const MatXd F = MatXd::Identity(12, 12) + dt * Ac + (dt * dt / 2.0) * A2 +
                  (dt * dt * dt / 6.0) * A3;
  const MatXd G = (dt * MatXd::Identity(12, 12) + (dt * dt / 2.0) * Ac +
                   (dt * dt * dt / 6.0) * A2 + (dt * dt * dt * dt / 24.0) * A3) *
                  Bc;
  return {F, G};
}

/// Hover-regulation OCP: input box from the normalized command range, state
/// weights fixed to the shipped tuning, input weight selectable (the sweep
/// presets are 900, 100, 50), Riccati terminal cost.
inline OcpSpecd quadrotor_ocp(const QuadParams& params, double r_weight = 900.0, int N = 15,
                              double dt = 0.002) {
  if (!(r_weight > 0)) throw DimensionMismatch("quadrotor_ocp: r_weight must be positive");
  auto [F, G] = linearize_hover(params, dt);

  OcpSpecd ocp;
  ocp.F = F;
  ocp.G = G;
  VecXd qdiag(12);
  qdiag << 100, 100, 100, 4, 4, 4, 4, 4, 4, 2.5, 2.5, 2.5;
  ocp.Q = qdiag.asDiagonal();
  ocp.R = r_weight * MatXd::Identity(4, 4);
  ocp.N = N;
  ocp.A_z = MatXd::Zero(8, 12);
  ocp.A_u.resize(8, 4);
  ocp.A_u.topRows(4) = MatXd::Identity(4, 4);
  ocp.A_u.bottomRows(4) = -MatXd::Identity(4, 4);
  ocp.b_s.resize(8);
  ocp.b_s.head(4) = VecXd::Ones(4) - params.u0;
  ocp.b_s.tail(4) = params.u0;
  ocp.set_riccati_terminal();
  return ocp;
}

}  // namespace mpcert
