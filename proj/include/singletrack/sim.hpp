#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "singletrack/angles.hpp"
#include "singletrack/config.hpp"
#include "singletrack/errors.hpp"
#include "singletrack/models.hpp"
#include "singletrack/param_id.hpp"
#include "singletrack/types.hpp"

namespace singletrack {

enum class ScenarioKind { Straight, StepSteer, SteadyCircle, Lap };

/// Open-loop scenario description. Steering and acceleration are
/// piecewise-constant schedules of (time, value) pairs; an empty
/// acceleration schedule enables the proportional speed hold, without which
/// cornering drag would bleed off the longitudinal speed.
struct Scenario {
    ScenarioKind kind = ScenarioKind::Straight;
    double duration = 10.0;   // [s]
    double v_target = 1.0;    // initial (and held) longitudinal speed [m/s]
    std::vector<std::pair<double, double>> delta_profile;  // (t [s], delta [rad])
    std::vector<std::pair<double, double>> a_x_profile;    // (t [s], a_x [m/s^2])
    bool speed_hold = true;
    double speed_hold_gain = 20.0;  // [1/s]
};

/// One ground-truth sample. The applied inputs are carried along so sensor
/// synthesis can emit the exact commanded (delta, a_x) streams.
struct TruthRecord {
    double t = 0.0;
    Pose pose;
    VelocityState vel;
    double a_y = 0.0;       // body-frame lateral acceleration v_y_dot + v_x*psi_dot [m/s^2]
    double delta = 0.0;     // applied steering [rad]
    double a_x_cmd = 0.0;   // applied longitudinal acceleration [m/s^2]
};

/// One synthetic sensor sample on the filter grid.
struct SensorRecord {
    double t = 0.0;
    double delta = 0.0;          // [rad], known from the control system
    double a_x = 0.0;            // [m/s^2]
    double a_y = 0.0;            // [m/s^2]
    double v_x_meas = 0.0;       // [m/s]
    double psi_dot_meas = 0.0;   // [rad/s]
};

inline Scenario make_straight(double duration, double v) {
    Scenario s;
    s.kind = ScenarioKind::Straight;
    s.duration = duration;
    s.v_target = v;
    s.delta_profile = {{0.0, 0.0}};
    return s;
}

inline Scenario make_step_steer(double duration, double v, double t_step, double delta) {
    Scenario s;
    s.kind = ScenarioKind::StepSteer;
    s.duration = duration;
    s.v_target = v;
    s.delta_profile = {{0.0, 0.0}, {t_step, delta}};
    return s;
}

inline Scenario make_steady_circle(double duration, double v, double delta) {
    Scenario s;
    s.kind = ScenarioKind::SteadyCircle;
    s.duration = duration;
    s.v_target = v;
    s.delta_profile = {{0.0, delta}};
    return s;
}

namespace detail {

inline double profile_value(const std::vector<std::pair<double, double>>& profile, double t,
                            double slack) {
    double value = 0.0;
    for (const auto& [start, v] : profile) {
        if (start <= t + slack)
            value = v;
        else
            break;
    }
    return value;
}

/// RK4 derivative of the full 6-state (X, Y, psi, v_x, v_y, psi_dot).
inline StateDerivative scenario_derivative(const Pose& pose, const VelocityState& vel,
                                           double delta, double a_x_sched,
                                           const Scenario& scenario, const VehicleParams& params,
                                           double v_min, double* a_x_out = nullptr) {
    ControlInput u;
    u.delta = delta;
    u.a_x = scenario.speed_hold && scenario.a_x_profile.empty()
                ? scenario.speed_hold_gain * (scenario.v_target - vel.v_x)
                : a_x_sched;
    if (a_x_out) *a_x_out = u.a_x;
    return dynamic_derivatives(pose, vel, u, params, v_min);
}

}  // namespace detail

/// Ground-truth trajectory: classical 4th-order Runge-Kutta on the
/// continuous dynamic model, inputs sampled-and-held per step.
/// Deterministic for identical inputs.
inline std::vector<TruthRecord> simulate(const Scenario& scenario, const VehicleParams& params,
                                         double dt_truth, double v_min = kDefaultVMin) {
    if (!(dt_truth > 0.0) || dt_truth > 0.001)
        throw InvalidValue("dt_truth must be in (0, 0.001]");
    if (!(scenario.duration > 0.0)) throw InvalidValue("scenario duration must be > 0");
    if (scenario.v_target < v_min)
        throw SpeedTooLow(scenario.v_target, v_min);
    for (const auto* profile : {&scenario.delta_profile, &scenario.a_x_profile})
        for (std::size_t i = 1; i < profile->size(); ++i)
            if ((*profile)[i].first < (*profile)[i - 1].first)
                throw InvalidValue("schedule breakpoints must be time-sorted");

    const long long steps = std::llround(scenario.duration / dt_truth);
    const double slack = 0.25 * dt_truth;

    Pose pose;
    VelocityState vel;
    vel.v_x = scenario.v_target;

    std::vector<TruthRecord> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);

    for (long long k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt_truth;
        const double delta = detail::profile_value(scenario.delta_profile, t, slack);
        const double a_x_sched = detail::profile_value(scenario.a_x_profile, t, slack);

        double a_x_applied = 0.0;
        const StateDerivative d0 = detail::scenario_derivative(pose, vel, delta, a_x_sched,
                                                               scenario, params, v_min,
                                                               &a_x_applied);
        TruthRecord rec;
        rec.t = t;
        rec.pose = pose;
        rec.vel = vel;
        rec.a_y = d0.dv_y + vel.v_x * vel.psi_dot;
        rec.delta = delta;
        rec.a_x_cmd = a_x_applied;
        out.push_back(rec);
        if (k == steps) break;

        auto advance = [&](const Pose& p, const VelocityState& v, const StateDerivative& d,
                           double h, Pose& pn, VelocityState& vn) {
            pn.X = p.X + h * d.dX;
            pn.Y = p.Y + h * d.dY;
            pn.psi = p.psi + h * d.dpsi;  // kept unwrapped inside the step
            vn.v_x = v.v_x + h * d.dv_x;
            vn.v_y = v.v_y + h * d.dv_y;
            vn.psi_dot = v.psi_dot + h * d.dpsi_dot;
        };
        auto deriv = [&](const Pose& p, const VelocityState& v) {
            return detail::scenario_derivative(p, v, delta, a_x_sched, scenario, params, v_min);
        };

        Pose p2, p3, p4;
        VelocityState v2, v3, v4;
        advance(pose, vel, d0, 0.5 * dt_truth, p2, v2);
        const StateDerivative d2 = deriv(p2, v2);
        advance(pose, vel, d2, 0.5 * dt_truth, p3, v3);
        const StateDerivative d3 = deriv(p3, v3);
        advance(pose, vel, d3, dt_truth, p4, v4);
        const StateDerivative d4 = deriv(p4, v4);

        const double h6 = dt_truth / 6.0;
        pose.X += h6 * (d0.dX + 2.0 * d2.dX + 2.0 * d3.dX + d4.dX);
        pose.Y += h6 * (d0.dY + 2.0 * d2.dY + 2.0 * d3.dY + d4.dY);
        pose.psi = wrap_angle(pose.psi +
                              h6 * (d0.dpsi + 2.0 * d2.dpsi + 2.0 * d3.dpsi + d4.dpsi));
        vel.v_x += h6 * (d0.dv_x + 2.0 * d2.dv_x + 2.0 * d3.dv_x + d4.dv_x);
        vel.v_y += h6 * (d0.dv_y + 2.0 * d2.dv_y + 2.0 * d3.dv_y + d4.dv_y);
        vel.psi_dot += h6 * (d0.dpsi_dot + 2.0 * d2.dpsi_dot + 2.0 * d3.dpsi_dot + d4.dpsi_dot);
    }
    return out;
}

namespace detail {

inline double grid_step(std::span<const TruthRecord> truth) {
    if (truth.size() < 2) throw GridMismatch("need at least 2 truth records");
    const double dt = truth[1].t - truth[0].t;
    if (!(dt > 0.0)) throw GridMismatch("truth timestamps must increase");
    return dt;
}

inline std::size_t resample_stride(double dt_coarse, double dt_fine) {
    const double ratio = dt_coarse / dt_fine;
    const long long stride = std::llround(ratio);
    if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-6)
        throw GridMismatch("coarse step must be an integer multiple of the truth step");
    return static_cast<std::size_t>(stride);
}

}  // namespace detail

/// Pick every stride-th truth record so the result lives on a coarser grid.
inline std::vector<TruthRecord> resample_truth(std::span<const TruthRecord> truth,
                                               double dt_coarse) {
    const double dt_truth = detail::grid_step(truth);
    const std::size_t stride = detail::resample_stride(dt_coarse, dt_truth);
    std::vector<TruthRecord> out;
    out.reserve(truth.size() / stride + 1);
    for (std::size_t i = 0; i < truth.size(); i += stride) out.push_back(truth[i]);
    return out;
}

/// Resample the truth to the sensor grid and add seeded Gaussian noise and
/// bias per channel. Bit-identical output for identical inputs and seed.
inline std::vector<SensorRecord> synthesize_sensors(std::span<const TruthRecord> truth,
                                                    const SensorNoise& noise, double dt_sensor) {
    if (noise.sigma_psidot < 0 || noise.sigma_vx < 0 || noise.sigma_ax < 0 || noise.sigma_ay < 0)
        throw InvalidValue("sensor noise sigmas must be >= 0");
    const double dt_truth = detail::grid_step(truth);
    const std::size_t stride = detail::resample_stride(dt_sensor, dt_truth);

    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<SensorRecord> out;
    out.reserve(truth.size() / stride + 1);
    for (std::size_t i = 0; i < truth.size(); i += stride) {
        const TruthRecord& r = truth[i];
        SensorRecord s;
        s.t = r.t;
        s.delta = r.delta;  // known from the control system, no noise channel
        s.psi_dot_meas = r.vel.psi_dot + noise.bias_psidot + noise.sigma_psidot * gauss(rng);
        s.v_x_meas = r.vel.v_x + noise.bias_vx + noise.sigma_vx * gauss(rng);
        s.a_x = r.a_x_cmd + noise.bias_ax + noise.sigma_ax * gauss(rng);
        s.a_y = r.a_y + noise.bias_ay + noise.sigma_ay * gauss(rng);
        out.push_back(s);
    }
    return out;
}

struct MarkerExportOptions {
    double front_offset;       // CoG to front marker along the body axis [m]
    double rear_offset;        // CoG to rear marker [m]
    double sigma_marker = 0.0; // per-coordinate tracking noise [m]
    std::uint64_t seed = 12345;
};

/// Front/rear marker world positions derived from the truth poses.
inline std::vector<MarkerRecord> export_markers(std::span<const TruthRecord> truth,
                                                double dt_marker,
                                                const MarkerExportOptions& opt) {
    if (!(opt.front_offset > 0.0) || !(opt.rear_offset > 0.0))
        throw InvalidValue("marker offsets must be > 0");
    if (opt.sigma_marker < 0.0) throw InvalidValue("sigma_marker must be >= 0");
    const double dt_truth = detail::grid_step(truth);
    const std::size_t stride = detail::resample_stride(dt_marker, dt_truth);

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<MarkerRecord> out;
    out.reserve(truth.size() / stride + 1);
    for (std::size_t i = 0; i < truth.size(); i += stride) {
        const TruthRecord& r = truth[i];
        const double c = std::cos(r.pose.psi);
        const double s = std::sin(r.pose.psi);
        MarkerRecord m;
        m.t = r.t;
        m.x_front = r.pose.X + opt.front_offset * c + opt.sigma_marker * gauss(rng);
        m.y_front = r.pose.Y + opt.front_offset * s + opt.sigma_marker * gauss(rng);
        m.x_rear = r.pose.X - opt.rear_offset * c + opt.sigma_marker * gauss(rng);
        m.y_rear = r.pose.Y - opt.rear_offset * s + opt.sigma_marker * gauss(rng);
        out.push_back(m);
    }
    return out;
}

/// Assemble the circular-run input for cornering-stiffness identification:
/// tracked markers plus the IMU-like channels, all on the same grid.
inline CircularRunData synthesize_circular_run(std::span<const TruthRecord> truth,
                                               const SensorNoise& noise, double dt_sensor,
                                               const MarkerExportOptions& marker_opt) {
    CircularRunData run;
    run.markers = export_markers(truth, dt_sensor, marker_opt);
    const std::vector<SensorRecord> sensors = synthesize_sensors(truth, noise, dt_sensor);
    const double dt_truth = detail::grid_step(truth);
    const std::size_t stride = detail::resample_stride(dt_sensor, dt_truth);

    std::mt19937_64 rng(noise.seed ^ 0x517cc1b727220a95ULL);  // independent speed channel
    std::normal_distribution<double> gauss(0.0, 1.0);

    double delta_sum = 0.0;
    for (std::size_t i = 0, k = 0; i < truth.size(); i += stride, ++k) {
        const TruthRecord& r = truth[i];
        run.a_y.push_back(sensors[k].a_y);
        run.psi_dot.push_back(sensors[k].psi_dot_meas);
        run.v.push_back(std::hypot(r.vel.v_x, r.vel.v_y) + noise.bias_vx +
                        noise.sigma_vx * gauss(rng));
        delta_sum += r.delta;
    }
    run.delta = delta_sum / static_cast<double>(run.markers.size());
    return run;
}

/// Builds a lap of four identical (corner, straight) segments. The corner
/// steering angle is bisection-tuned until one segment turns the heading by
/// exactly pi/2, and the straights are long enough for the lateral
/// transients to decay, so four segments compose to the identity rigid
/// motion and the truth lap closes to numerical precision.
inline Scenario make_lap(double v, double corner_delta_guess, const VehicleParams& params,
                         double dt_truth, double v_min = kDefaultVMin) {
    if (!(corner_delta_guess > 0.0)) throw InvalidValue("corner_delta_guess must be > 0");
    const double straight_duration = 2.0;

    // initial corner duration from the linearized steady-state yaw rate
    const double sm = params.l_v * params.C_v - params.l_h * params.C_h;
    const double a11 = params.C_v + params.C_h;
    const double a12 = sm + params.m * v * v;
    const double a21 = sm;
    const double a22 = params.l_v * params.l_v * params.C_v + params.l_h * params.l_h * params.C_h;
    const double b1 = params.C_v * corner_delta_guess * v;
    const double b2 = params.l_v * params.C_v * corner_delta_guess * v;
    const double det = a11 * a22 - a12 * a21;
    const double psi_dot_est = (a11 * b2 - a21 * b1) / det;
    if (!(psi_dot_est > 1e-6)) throw InvalidValue("corner_delta_guess gives no usable yaw rate");

    double corner_duration =
        static_cast<double>(std::llround((0.5 * kPi / psi_dot_est) / dt_truth)) * dt_truth;
    corner_duration = std::max(corner_duration, 10.0 * dt_truth);

    auto segment_heading = [&](double delta_c) {
        Scenario seg;
        seg.kind = ScenarioKind::StepSteer;
        seg.duration = corner_duration + straight_duration;
        seg.v_target = v;
        seg.delta_profile = {{0.0, delta_c}, {corner_duration, 0.0}};
        const std::vector<TruthRecord> records = simulate(seg, params, dt_truth, v_min);
        double total = 0.0;
        for (std::size_t k = 1; k < records.size(); ++k)
            total += wrap_angle(records[k].pose.psi - records[k - 1].pose.psi);
        return total;
    };

    // bracket the pi/2 heading change, then bisect
    double lo = 0.5 * corner_delta_guess;
    double hi = corner_delta_guess;
    const double target = 0.5 * kPi;
    while (segment_heading(hi) < target) {
        lo = hi;
        hi *= 1.25;
        if (hi > 1.4) throw InvalidValue("cannot reach a 90 degree corner with this steering");
    }
    while (segment_heading(lo) > target) {
        hi = lo;
        lo *= 0.8;
        if (lo < 1e-4) throw InvalidValue("corner heading change does not bracket 90 degrees");
    }
    for (int iter = 0; iter < 80; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (segment_heading(mid) < target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14) break;
    }
    const double delta_c = 0.5 * (lo + hi);

    Scenario lap;
    lap.kind = ScenarioKind::Lap;
    lap.v_target = v;
    lap.duration = 4.0 * (corner_duration + straight_duration);
    for (int seg = 0; seg < 4; ++seg) {
        const double t0 = static_cast<double>(seg) * (corner_duration + straight_duration);
        lap.delta_profile.emplace_back(t0, delta_c);
        lap.delta_profile.emplace_back(t0 + corner_duration, 0.0);
    }
    return lap;
}

}  // namespace singletrack
