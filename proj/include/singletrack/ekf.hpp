#pragma once

#include <cmath>
#include <optional>

#include <Eigen/Dense>

#include "singletrack/config.hpp"
#include "singletrack/models.hpp"
#include "singletrack/types.hpp"

namespace singletrack {

/// Filter state: velocity estimate with covariance, plus the pose that is
/// dead-reckoned from the filtered velocities outside the filter.
struct FilterEstimate {
    VelocityState vel;
    Pose pose;
    Eigen::Matrix3d P = Eigen::Matrix3d::Zero();  // covariance over (v_x, v_y, psi_dot)
    double t = 0.0;                               // [s]
};

/// Constant measurement matrix: z = (psi_dot, v_x) picked out of the state.
inline const Eigen::Matrix<double, 2, 3>& measurement_matrix() {
    static const Eigen::Matrix<double, 2, 3> H = [] {
        Eigen::Matrix<double, 2, 3> m;
        m << 0, 0, 1,
             1, 0, 0;
        return m;
    }();
    return H;
}

namespace detail {

inline Eigen::Matrix3d symmetrize(const Eigen::Matrix3d& M) {
    return 0.5 * (M + M.transpose());
}

}  // namespace detail

/// A-priori update: propagate the velocity state through the discrete
/// dynamic model, the covariance through its Jacobian, and dead-reckon the
/// pose with the pre-step velocities. Below v_min the dynamic model is
/// singular, so the kinematic model propagates instead: v_y pinned to zero,
/// yaw rate from the steering geometry, covariance inflated by Q.
inline FilterEstimate predict(const FilterEstimate& est, const ControlInput& u, const Config& cfg) {
    FilterEstimate next = est;
    next.t = est.t + cfg.dt;
    if (est.vel.v_x < cfg.v_min) {
        next.pose = kinematic_step(est.pose, est.vel.v_x, u.delta, cfg.dt, cfg.params);
        next.vel.v_x = est.vel.v_x + cfg.dt * u.a_x;
        next.vel.v_y = 0.0;
        next.vel.psi_dot = est.vel.v_x * std::tan(u.delta) / cfg.params.wheelbase();
        next.P = detail::symmetrize(est.P + cfg.noise.Q);
        return next;
    }
    next.vel = dynamic_discrete_step(est.vel, u, cfg.params, cfg.dt, cfg.v_min, cfg.eps_den);
    const Eigen::Matrix3d Phi =
        discrete_jacobian(est.vel, u, cfg.params, cfg.dt, cfg.v_min, cfg.eps_den);
    next.P = detail::symmetrize(Phi * est.P * Phi.transpose() + cfg.noise.Q);
    next.pose = pose_integrate(est.pose, est.vel, cfg.dt);
    return next;
}

/// A-posteriori update with a (psi_dot, v_x) measurement. The covariance
/// uses the Joseph form, which is algebraically identical to (I - KH)P but
/// preserves symmetry and positive semidefiniteness numerically.
inline FilterEstimate correct(const FilterEstimate& est, const Measurement& z, const Config& cfg) {
    if (!std::isfinite(z.psi_dot_meas) || !std::isfinite(z.v_x_meas))
        throw InvalidValue("non-finite measurement");
    const Eigen::Matrix<double, 2, 3>& H = measurement_matrix();
    const Eigen::Matrix2d S = H * est.P * H.transpose() + cfg.noise.R;
    // 2x2 inverse via determinant; guard against numerically singular S.
    const double det = S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
    const double scale = S.cwiseAbs().maxCoeff();
    if (!(std::abs(det) > 1e-15 * std::max(scale * scale, 1e-300)))
        throw SingularInnovationCovariance();
    Eigen::Matrix2d S_inv;
    S_inv << S(1, 1), -S(0, 1), -S(1, 0), S(0, 0);
    S_inv /= det;

    const Eigen::Matrix<double, 3, 2> K = est.P * H.transpose() * S_inv;
    const Eigen::Vector2d innovation(z.psi_dot_meas - est.vel.psi_dot,
                                     z.v_x_meas - est.vel.v_x);
    const Eigen::Vector3d dx = K * innovation;

    FilterEstimate next = est;
    next.vel.v_x += dx(0);
    next.vel.v_y += dx(1);
    next.vel.psi_dot += dx(2);
    const Eigen::Matrix3d IKH = Eigen::Matrix3d::Identity() - K * H;
    next.P = detail::symmetrize(IKH * est.P * IKH.transpose() +
                                K * cfg.noise.R * K.transpose());
    return next;
}

/// One filter cycle: predict, then correct iff a measurement is present.
/// Predictions run every dt; measurements may be absent in between.
inline FilterEstimate step(const FilterEstimate& est, const ControlInput& u,
                           const std::optional<Measurement>& z, const Config& cfg) {
    FilterEstimate predicted = predict(est, u, cfg);
    if (z) return correct(predicted, *z, cfg);
    return predicted;
}

/// Replace the dead-reckoned pose (e.g. on an external camera fix).
/// Velocity state and covariance are untouched; psi is normalized.
inline FilterEstimate reset_pose(const FilterEstimate& est, const Pose& pose) {
    FilterEstimate next = est;
    next.pose = pose;
    next.pose.psi = wrap_angle(pose.psi);
    return next;
}

}  // namespace singletrack
