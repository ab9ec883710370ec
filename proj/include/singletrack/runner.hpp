#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "singletrack/config.hpp"
#include "singletrack/ekf.hpp"
#include "singletrack/errors.hpp"
#include "singletrack/metrics.hpp"
#include "singletrack/sim.hpp"

namespace singletrack {

enum class EstimatorModel { DynamicEkf, Kinematic };

struct PoseReset {
    double t = 0.0;
    Pose pose;
};

struct RunOptions {
    EstimatorModel model = EstimatorModel::DynamicEkf;
    std::vector<PoseReset> pose_resets;  // applied after the step whose time matches
};

struct EstimateRow {
    double t = 0.0;
    Pose pose;
    VelocityState vel;
    double p_vx = 0.0, p_vy = 0.0, p_psidot = 0.0;  // covariance diagonal
};

struct RunResult {
    std::vector<EstimateRow> rows;
    ClosureMetrics closure;
};

/// Stream the estimator over a sensor log. The filter initializes from the
/// first row (pose at the origin, velocities from the measurements) and
/// then performs one predict+correct cycle per row. --model kinematic
/// replaces the filter with plain kinematic dead reckoning on the measured
/// speed and steering angle. Errors are reported with the offending row.
inline RunResult run_estimate(std::span<const SensorRecord> log, const Config& cfg,
                              const RunOptions& opt = {}) {
    if (log.size() < 2) throw EmptyTrajectory();
    for (std::size_t k = 1; k < log.size(); ++k) {
        const double expected = log.front().t + static_cast<double>(k) * cfg.dt;
        if (std::abs(log[k].t - expected) > 0.25 * cfg.dt)
            throw GridMismatch("sensor log is not on the dt=" + std::to_string(cfg.dt) +
                               " filter grid at row " + std::to_string(k + 1));
    }

    RunResult result;
    result.rows.reserve(log.size());

    FilterEstimate est;
    est.t = log.front().t;
    est.pose = Pose{};
    est.vel = VelocityState{log.front().v_x_meas, 0.0, log.front().psi_dot_meas};
    est.P = cfg.noise.P0;

    auto emit = [&](const FilterEstimate& e) {
        result.rows.push_back(
            {e.t, e.pose, e.vel, e.P(0, 0), e.P(1, 1), e.P(2, 2)});
    };
    emit(est);

    std::size_t next_reset = 0;
    auto apply_resets = [&](FilterEstimate& e) {
        while (next_reset < opt.pose_resets.size() &&
               opt.pose_resets[next_reset].t <= e.t + 0.25 * cfg.dt) {
            e = reset_pose(e, opt.pose_resets[next_reset].pose);
            ++next_reset;
        }
    };
    apply_resets(est);

    for (std::size_t k = 1; k < log.size(); ++k) {
        const SensorRecord& row = log[k];
        if (std::abs(row.delta) > cfg.delta_max)
            throw InvalidValue("steering " + std::to_string(row.delta) +
                               " rad exceeds delta_max at row " + std::to_string(k + 1));
        try {
            const ControlInput u{row.delta, row.a_x};
            if (opt.model == EstimatorModel::DynamicEkf) {
                const Measurement z{row.psi_dot_meas, row.v_x_meas};
                est = step(est, u, std::optional<Measurement>(z), cfg);
            } else {
                est.pose = kinematic_step(est.pose, row.v_x_meas, row.delta, cfg.dt, cfg.params);
                est.vel = VelocityState{
                    row.v_x_meas, 0.0,
                    row.v_x_meas * std::tan(row.delta) / cfg.params.wheelbase()};
                est.t = row.t;
                est.P.setZero();
            }
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " (sensor row " +
                                      std::to_string(k + 1) + ", t=" + std::to_string(row.t) +
                                      ")");
        }
        apply_resets(est);
        emit(est);
    }

    std::vector<Pose> poses;
    poses.reserve(result.rows.size());
    for (const EstimateRow& r : result.rows) poses.push_back(r.pose);
    result.closure = closure_metrics(poses);
    return result;
}

/// Mean wall time of one predict+correct cycle, in microseconds.
inline double benchmark_filter_us(const Config& cfg, int iterations = 200000) {
    FilterEstimate est;
    est.vel = VelocityState{1.5, 0.02, 0.5};
    est.P = cfg.noise.P0;
    const ControlInput u{0.1, 0.05};
    const Measurement z{0.5, 1.5};

    // warm-up to stabilize caches and branch predictors
    for (int k = 0; k < 1000; ++k) est = correct(predict(est, u, cfg), z, cfg);

    est.vel = VelocityState{1.5, 0.02, 0.5};
    est.P = cfg.noise.P0;
    const auto start = std::chrono::steady_clock::now();
    double sink = 0.0;
    for (int k = 0; k < iterations; ++k) {
        est = correct(predict(est, u, cfg), z, cfg);
        sink += est.vel.v_x;
    }
    const auto stop = std::chrono::steady_clock::now();
    if (!std::isfinite(sink)) throw InvalidValue("benchmark produced non-finite state");
    const double total_us =
        std::chrono::duration_cast<std::chrono::duration<double, std::micro>>(stop - start)
            .count();
    return total_us / static_cast<double>(iterations);
}

}  // namespace singletrack
