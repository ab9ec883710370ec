#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "singletrack/angles.hpp"
#include "singletrack/config.hpp"
#include "singletrack/errors.hpp"
#include "singletrack/models.hpp"
#include "singletrack/sim.hpp"
#include "singletrack/types.hpp"

namespace singletrack {

/// Loop-closure quality of a trajectory whose true path returns to its
/// start: endpoint distance, normalized per meter traveled, and the yaw
/// closure angle.
struct ClosureMetrics {
    double path_length = 0.0;        // [m]
    double position_closure = 0.0;   // [m]
    double closure_per_meter = 0.0;  // [m/m]
    double yaw_closure = 0.0;        // [rad]
};

struct HorizonStats {
    int horizon_steps = 0;
    double mean_error = 0.0;  // [m]
    double max_error = 0.0;   // [m]
};

inline ClosureMetrics closure_metrics(std::span<const Pose> traj) {
    if (traj.size() < 2) throw EmptyTrajectory();
    ClosureMetrics m;
    for (std::size_t k = 1; k < traj.size(); ++k)
        m.path_length += std::hypot(traj[k].X - traj[k - 1].X, traj[k].Y - traj[k - 1].Y);
    if (!(m.path_length > 0.0)) throw ZeroPath();
    m.position_closure = std::hypot(traj.back().X - traj.front().X,
                                    traj.back().Y - traj.front().Y);
    m.closure_per_meter = m.position_closure / m.path_length;
    m.yaw_closure = std::abs(wrap_angle(traj.back().psi - traj.front().psi));
    return m;
}

/// Pointwise n-step comparison of an already-predicted pose log against
/// truth on the same grid: error_k = |est[k+n] - truth[k+n]|.
inline HorizonStats horizon_error(std::span<const Pose> est, std::span<const Pose> truth, int n) {
    if (n < 1) throw InvalidValue("horizon must be >= 1");
    if (est.size() != truth.size()) throw GridMismatch("estimate and truth logs differ in length");
    if (est.size() <= static_cast<std::size_t>(n))
        throw TooFewSamples("log shorter than the horizon");
    HorizonStats stats;
    stats.horizon_steps = n;
    std::size_t count = 0;
    for (std::size_t k = 0; k + static_cast<std::size_t>(n) < est.size(); ++k) {
        const std::size_t j = k + static_cast<std::size_t>(n);
        const double e = std::hypot(est[j].X - truth[j].X, est[j].Y - truth[j].Y);
        stats.mean_error += e;
        stats.max_error = std::max(stats.max_error, e);
        ++count;
    }
    stats.mean_error /= static_cast<double>(count);
    return stats;
}

enum class PredictionModel { Dynamic, Kinematic };

/// Open-loop n-step re-prediction error: from the truth state at every
/// index k, propagate n steps with the discrete model and the logged
/// inputs, then measure the position error against truth at k + n.
/// Truth and sensor logs must share the filter grid.
inline HorizonStats horizon_error_repredict(std::span<const TruthRecord> truth,
                                            std::span<const SensorRecord> sensors, int n,
                                            const Config& cfg,
                                            PredictionModel model = PredictionModel::Dynamic) {
    if (n < 1) throw InvalidValue("horizon must be >= 1");
    if (truth.size() != sensors.size())
        throw GridMismatch("truth and sensor logs differ in length");
    if (truth.size() <= static_cast<std::size_t>(n))
        throw TooFewSamples("log shorter than the horizon");
    for (std::size_t k = 0; k < truth.size(); ++k)
        if (std::abs(truth[k].t - sensors[k].t) > 0.25 * cfg.dt)
            throw GridMismatch("truth and sensor timestamps diverge");

    HorizonStats stats;
    stats.horizon_steps = n;
    std::size_t count = 0;
    for (std::size_t k = 0; k + static_cast<std::size_t>(n) < truth.size(); ++k) {
        Pose pose = truth[k].pose;
        VelocityState vel = truth[k].vel;
        for (int j = 1; j <= n; ++j) {
            const SensorRecord& s = sensors[k + static_cast<std::size_t>(j)];
            const ControlInput u{s.delta, s.a_x};
            if (model == PredictionModel::Dynamic) {
                pose = pose_integrate(pose, vel, cfg.dt);
                vel = dynamic_discrete_step(vel, u, cfg.params, cfg.dt, cfg.v_min, cfg.eps_den);
            } else {
                pose = kinematic_step(pose, vel.v_x, u.delta, cfg.dt, cfg.params);
                vel.v_x += cfg.dt * u.a_x;
                vel.v_y = 0.0;
                vel.psi_dot = vel.v_x * std::tan(u.delta) / cfg.params.wheelbase();
            }
        }
        const TruthRecord& target = truth[k + static_cast<std::size_t>(n)];
        const double e = std::hypot(pose.X - target.pose.X, pose.Y - target.pose.Y);
        stats.mean_error += e;
        stats.max_error = std::max(stats.max_error, e);
        ++count;
    }
    stats.mean_error /= static_cast<double>(count);
    return stats;
}

}  // namespace singletrack
