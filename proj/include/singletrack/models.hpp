#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "singletrack/angles.hpp"
#include "singletrack/errors.hpp"
#include "singletrack/types.hpp"

namespace singletrack {

inline constexpr double kDefaultVMin = 0.1;      // [m/s]
inline constexpr double kDefaultEpsDen = 1e-9;

/// Full continuous-time derivative of the dynamic single-track state.
struct StateDerivative {
    double dX = 0.0;        // [m/s]
    double dY = 0.0;        // [m/s]
    double dpsi = 0.0;      // [rad/s]
    double dv_x = 0.0;      // [m/s^2]
    double dv_y = 0.0;      // [m/s^2]
    double dpsi_dot = 0.0;  // [rad/s^2]
};

struct SlipAngles {
    double alpha_v = 0.0;  // front [rad]
    double alpha_h = 0.0;  // rear [rad]
};

struct LateralForces {
    double F_sv = 0.0;  // front axle lateral force [N]
    double F_sh = 0.0;  // rear axle lateral force [N]
};

/// One explicit-Euler step of the kinematic single-track model.
/// Heading rate comes from geometry alone: psi_dot = v_x * tan(delta) / l.
inline Pose kinematic_step(const Pose& pose, double v_x, double delta, double dt,
                           const VehicleParams& params) {
    Pose next;
    next.X = pose.X + dt * v_x * std::cos(pose.psi);
    next.Y = pose.Y + dt * v_x * std::sin(pose.psi);
    next.psi = wrap_angle(pose.psi + dt * v_x * std::tan(delta) / params.wheelbase());
    return next;
}

/// Front/rear tire slip angles. The drift angle beta and the speed are
/// computed exactly from (v_x, v_y); throws SpeedTooLow when the division
/// by speed becomes ill-conditioned.
inline SlipAngles slip_angles(const VelocityState& vel, double delta, const VehicleParams& params,
                              double v_min = kDefaultVMin) {
    const double v = std::hypot(vel.v_x, vel.v_y);
    if (v < v_min) throw SpeedTooLow(v, v_min);
    const double beta = std::atan2(vel.v_y, vel.v_x);
    SlipAngles a;
    a.alpha_v = delta - beta - vel.psi_dot * params.l_v / v;
    a.alpha_h = -beta + vel.psi_dot * params.l_h / v;
    return a;
}

/// Linear tire law, valid for small slip angles.
inline LateralForces lateral_forces(const SlipAngles& alphas, const VehicleParams& params) {
    return {params.C_v * alphas.alpha_v, params.C_h * alphas.alpha_h};
}

/// Continuous-time dynamic single-track state equations.
inline StateDerivative dynamic_derivatives(const Pose& pose, const VelocityState& vel,
                                           const ControlInput& u, const VehicleParams& params,
                                           double v_min = kDefaultVMin) {
    const SlipAngles alphas = slip_angles(vel, u.delta, params, v_min);
    const LateralForces f = lateral_forces(alphas, params);
    const double cd = std::cos(u.delta);
    const double sd = std::sin(u.delta);
    StateDerivative d;
    d.dX = vel.v_x * std::cos(pose.psi) - vel.v_y * std::sin(pose.psi);
    d.dY = vel.v_y * std::cos(pose.psi) + vel.v_x * std::sin(pose.psi);
    d.dpsi = vel.psi_dot;
    d.dv_x = u.a_x + vel.v_y * vel.psi_dot - f.F_sv * sd / params.m;
    d.dv_y = -vel.v_x * vel.psi_dot + (f.F_sv * cd + f.F_sh) / params.m;
    d.dpsi_dot = (params.l_v * f.F_sv * cd - params.l_h * f.F_sh) / params.J_z;
    return d;
}

namespace detail {

/// Pieces of the one-step discrete velocity map, written in increment form
///   v_y'    = v_y    + dt*(drive_vy - v_y*damp_vy) / den_vy
///   psi_dot' = psi_dot + dt*(drive_psidot - psi_dot*damp_psidot) / den_psidot
/// The map is the semi-implicit discretization of the linear single-track
/// velocity dynamics: each equation is solved for its own new state, the
/// cross terms stay explicit. For dt = 0 it is the identity, bit-exactly.
struct DiscreteTerms {
    double drive_vy, damp_vy, den_vy;
    double drive_psidot, damp_psidot, den_psidot;
};

inline DiscreteTerms discrete_terms(const VelocityState& vel, const ControlInput& u,
                                    const VehicleParams& p, double dt) {
    const double stiffness_moment = p.l_v * p.C_v - p.l_h * p.C_h;
    DiscreteTerms t;
    t.drive_vy = -stiffness_moment * vel.psi_dot + p.C_v * u.delta * vel.v_x -
                 p.m * vel.v_x * vel.v_x * vel.psi_dot;
    t.damp_vy = p.C_v + p.C_h;
    t.den_vy = p.m * vel.v_x + dt * t.damp_vy;
    t.drive_psidot = -stiffness_moment * vel.v_y + p.l_v * p.C_v * u.delta * vel.v_x;
    t.damp_psidot = p.l_v * p.l_v * p.C_v + p.l_h * p.l_h * p.C_h;
    t.den_psidot = p.J_z * vel.v_x + dt * t.damp_psidot;
    return t;
}

}  // namespace detail

/// One step of the discrete-time dynamic velocity model.
/// v_x integrates the commanded acceleration; v_y and psi_dot follow the
/// semi-implicit closed forms, which share the continuous model's fixed
/// points and contract toward them for valid parameters.
inline VelocityState dynamic_discrete_step(const VelocityState& vel, const ControlInput& u,
                                           const VehicleParams& params, double dt,
                                           double v_min = kDefaultVMin,
                                           double eps_den = kDefaultEpsDen) {
    if (vel.v_x < v_min) throw SpeedTooLow(vel.v_x, v_min);
    const detail::DiscreteTerms t = detail::discrete_terms(vel, u, params, dt);
    if (std::abs(t.den_vy) <= eps_den) throw SingularDenominator("lateral velocity");
    if (std::abs(t.den_psidot) <= eps_den) throw SingularDenominator("yaw rate");
    VelocityState next;
    next.v_x = vel.v_x + dt * u.a_x;
    next.v_y = vel.v_y + dt * (t.drive_vy - vel.v_y * t.damp_vy) / t.den_vy;
    next.psi_dot =
        vel.psi_dot + dt * (t.drive_psidot - vel.psi_dot * t.damp_psidot) / t.den_psidot;
    if (!std::isfinite(next.v_x) || !std::isfinite(next.v_y) || !std::isfinite(next.psi_dot))
        throw InvalidValue("non-finite velocity state after discrete step");
    return next;
}

/// Discrete pose propagation from the previous pose and previous velocities.
inline Pose pose_integrate(const Pose& pose, const VelocityState& vel, double dt) {
    const double c = std::cos(pose.psi);
    const double s = std::sin(pose.psi);
    Pose next;
    next.X = pose.X + dt * (vel.v_x * c - vel.v_y * s);
    next.Y = pose.Y + dt * (vel.v_y * c + vel.v_x * s);
    next.psi = wrap_angle(pose.psi + dt * vel.psi_dot);
    return next;
}

/// Closed-form Jacobian of dynamic_discrete_step with respect to the state
/// (v_x, v_y, psi_dot), evaluated at the previous state. Row one is
/// (1, 0, 0): the discrete v_x update depends only on v_x and the input.
inline Eigen::Matrix3d discrete_jacobian(const VelocityState& vel, const ControlInput& u,
                                         const VehicleParams& params, double dt,
                                         double v_min = kDefaultVMin,
                                         double eps_den = kDefaultEpsDen) {
    if (vel.v_x < v_min) throw SpeedTooLow(vel.v_x, v_min);
    const detail::DiscreteTerms t = detail::discrete_terms(vel, u, params, dt);
    if (std::abs(t.den_vy) <= eps_den) throw SingularDenominator("lateral velocity");
    if (std::abs(t.den_psidot) <= eps_den) throw SingularDenominator("yaw rate");

    const VehicleParams& p = params;
    const double stiffness_moment = p.l_v * p.C_v - p.l_h * p.C_h;

    Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
    J(0, 0) = 1.0;

    // den_vy depends on v_x through its m*v_x term
    const double ddrive_vy_dvx = p.C_v * u.delta - 2.0 * p.m * vel.v_x * vel.psi_dot;
    J(1, 0) = dt *
              (ddrive_vy_dvx * t.den_vy - (t.drive_vy - vel.v_y * t.damp_vy) * p.m) /
              (t.den_vy * t.den_vy);
    J(1, 1) = p.m * vel.v_x / t.den_vy;
    J(1, 2) = dt * (-stiffness_moment - p.m * vel.v_x * vel.v_x) / t.den_vy;

    const double ddrive_ps_dvx = p.l_v * p.C_v * u.delta;
    J(2, 0) = dt *
              (ddrive_ps_dvx * t.den_psidot -
               (t.drive_psidot - vel.psi_dot * t.damp_psidot) * p.J_z) /
              (t.den_psidot * t.den_psidot);
    J(2, 1) = -dt * stiffness_moment / t.den_psidot;
    J(2, 2) = p.J_z * vel.v_x / t.den_psidot;
    return J;
}

}  // namespace singletrack
