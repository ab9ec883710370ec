#pragma once

#include <cmath>

#include "singletrack/angles.hpp"
#include "singletrack/errors.hpp"

namespace singletrack {

/// Physical constants of the car. All strictly positive (validate_params).
struct VehicleParams {
    double m = 4.0;      // total mass [kg]
    double l_v = 0.18;   // CoG to front axle [m]
    double l_h = 0.18;   // CoG to rear axle [m]
    double J_z = 0.05;   // yaw moment of inertia [kg m^2]
    double C_v = 50.0;   // front cornering stiffness [N/rad]
    double C_h = 50.0;   // rear cornering stiffness [N/rad]

    double wheelbase() const { return l_v + l_h; }
};

/// Planar pose of the CoG. psi is kept in (-pi, pi] by every operation
/// that produces a Pose.
struct Pose {
    double X = 0.0;    // [m]
    double Y = 0.0;    // [m]
    double psi = 0.0;  // yaw [rad], counterclockwise positive
};

/// The 3-dimensional filter state.
struct VelocityState {
    double v_x = 0.0;      // longitudinal velocity [m/s]
    double v_y = 0.0;      // lateral velocity [m/s]
    double psi_dot = 0.0;  // yaw rate [rad/s]
};

/// System input: front steering angle and longitudinal acceleration.
struct ControlInput {
    double delta = 0.0;  // [rad], left-steer positive
    double a_x = 0.0;    // [m/s^2]
};

/// Direct measurements fused by the filter.
struct Measurement {
    double psi_dot_meas = 0.0;  // [rad/s]
    double v_x_meas = 0.0;      // [m/s]
};

/// Returns the params unchanged iff every field is strictly positive;
/// otherwise throws NonPositiveParameter naming the first violation.
inline VehicleParams validate_params(const VehicleParams& raw) {
    auto check = [](double value, const char* name) {
        if (!(value > 0.0) || !std::isfinite(value)) throw NonPositiveParameter(name);
    };
    check(raw.m, "m");
    check(raw.l_v, "l_v");
    check(raw.l_h, "l_h");
    check(raw.J_z, "J_z");
    check(raw.C_v, "C_v");
    check(raw.C_h, "C_h");
    return raw;
}

}  // namespace singletrack
