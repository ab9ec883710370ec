#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "singletrack/angles.hpp"
#include "singletrack/errors.hpp"

namespace singletrack {

/// Static axle (or side) loads from the scale experiment.
struct AxleLoads {
    double F_gv = 0.0;  // under front axle [N]
    double F_gh = 0.0;  // under rear axle [N]
    std::optional<double> F_left;   // lateral CoG, reported only
    std::optional<double> F_right;
};

/// Bifilar pendulum geometry plus the logged oscillation cycle starts.
struct PendulumSetup {
    double D = 0.0;  // cord separation [m]
    double L = 0.0;  // cord length [m]
    double m = 0.0;  // suspended mass [kg]
    std::vector<double> cycle_times;  // strictly increasing [s]
};

/// One optical-tracking sample: front and rear marker world positions.
struct MarkerRecord {
    double t = 0.0;      // [s]
    double x_front = 0.0, y_front = 0.0;  // [m]
    double x_rear = 0.0, y_rear = 0.0;    // [m]
};

/// Steady-state circular drive log for cornering-stiffness identification.
/// All sample streams are aligned to the marker timestamps.
struct CircularRunData {
    std::vector<MarkerRecord> markers;
    std::vector<double> a_y;      // lateral acceleration [m/s^2]
    std::vector<double> psi_dot;  // yaw rate [rad/s]
    std::vector<double> v;        // speed [m/s]
    double delta = 0.0;           // steering angle, constant per run [rad]
};

struct CogSample {
    double t = 0.0;
    double x = 0.0, y = 0.0;  // CoG position [m]
    double heading = 0.0;      // marker-axis direction [rad]
};

struct DriftSample {
    double t = 0.0;
    double beta = 0.0;  // drift angle [rad]
};

/// CoG axle distances from the scale experiment. The loads must balance the
/// weight within 2% or the measurement is rejected.
inline std::pair<double, double> cog_from_scale(const AxleLoads& loads, double l, double m,
                                                double g) {
    if (loads.F_gv < 0.0 || loads.F_gh < 0.0) throw InvalidValue("axle loads must be >= 0");
    if (!(l > 0.0) || !(m > 0.0) || !(g > 0.0))
        throw InvalidValue("wheelbase, mass and g must be > 0");
    const double weight = m * g;
    const double sum = loads.F_gv + loads.F_gh;
    if (std::abs(sum - weight) > 0.02 * weight) throw InconsistentLoads(sum, weight);
    const double l_h = loads.F_gv * l / weight;
    const double l_v = loads.F_gh * l / weight;
    return {l_v, l_h};
}

/// Mean oscillation period from successive cycle-start timestamps.
inline double mean_period(std::span<const double> cycle_times) {
    if (cycle_times.size() < 2) throw TooFewCycles();
    for (std::size_t i = 1; i < cycle_times.size(); ++i)
        if (!(cycle_times[i] > cycle_times[i - 1]))
            throw InvalidValue("cycle timestamps must be strictly increasing");
    return (cycle_times.back() - cycle_times.front()) /
           static_cast<double>(cycle_times.size() - 1);
}

/// Yaw moment of inertia from the bifilar-pendulum experiment.
/// The default constant 16*pi^2*L comes from the standard small-angle
/// derivation; paper_constant selects the 16*pi*L variant for comparison
/// with sources that print it that way.
inline double inertia_bifilar(const PendulumSetup& setup, double g, bool paper_constant = false) {
    if (!(setup.D > 0.0) || !(setup.L > 0.0) || !(setup.m > 0.0))
        throw InvalidValue("pendulum D, L, m must be > 0");
    const double T = mean_period(setup.cycle_times);
    const double denom = paper_constant ? 16.0 * kPi * setup.L : 16.0 * kPi * kPi * setup.L;
    return setup.m * g * setup.D * setup.D * T * T / denom;
}

/// CoG track from marker positions: the CoG sits on the marker axis at
/// distance l_h ahead of the rear marker; heading is the axis direction.
inline std::vector<CogSample> cog_track(std::span<const MarkerRecord> markers, double l_v,
                                        double l_h) {
    if (markers.size() < 2) throw TooFewSamples("cog_track needs at least 2 marker records");
    const double nominal_sep = l_v + l_h;
    std::vector<CogSample> out;
    out.reserve(markers.size());
    for (const MarkerRecord& rec : markers) {
        const double ax = rec.x_front - rec.x_rear;
        const double ay = rec.y_front - rec.y_rear;
        const double sep = std::hypot(ax, ay);
        if (sep < 1e-6) throw DegenerateMarkers(rec.t);
        if (std::abs(sep - nominal_sep) > 0.05 * nominal_sep)
            throw InvalidValue("marker separation " + std::to_string(sep) +
                               " m deviates more than 5% from nominal " +
                               std::to_string(nominal_sep) + " m at t=" + std::to_string(rec.t));
        CogSample s;
        s.t = rec.t;
        s.x = rec.x_rear + (l_h / sep) * ax;
        s.y = rec.y_rear + (l_h / sep) * ay;
        s.heading = wrap_angle(std::atan2(ay, ax));
        out.push_back(s);
    }
    return out;
}

/// Drift angle series: trajectory tangents from central differences of the
/// moving-average-smoothed CoG positions, beta = wrap(tangent - heading).
/// (beta = atan2(v_y, v_x) in the body frame, so the world velocity
/// direction is heading + beta.)
inline std::vector<DriftSample> drift_angle_series(std::span<const CogSample> cog, int window) {
    if (window < 3 || window % 2 == 0) throw InvalidValue("smoothing window must be odd and >= 3");
    const std::size_t n = cog.size();
    if (n < static_cast<std::size_t>(window) + 2)
        throw TooFewSamples("drift_angle_series needs at least window + 2 samples");
    const std::ptrdiff_t h = window / 2;
    const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(n);

    // centered moving average, defined for k in [h, n-1-h]
    auto avg_x = [&](std::ptrdiff_t k) {
        double s = 0.0;
        for (std::ptrdiff_t j = -h; j <= h; ++j) s += cog[static_cast<std::size_t>(k + j)].x;
        return s / window;
    };
    auto avg_y = [&](std::ptrdiff_t k) {
        double s = 0.0;
        for (std::ptrdiff_t j = -h; j <= h; ++j) s += cog[static_cast<std::size_t>(k + j)].y;
        return s / window;
    };

    std::vector<DriftSample> out;
    for (std::ptrdiff_t k = h + 1; k + h + 1 < count; ++k) {
        const double dx = avg_x(k + 1) - avg_x(k - 1);
        const double dy = avg_y(k + 1) - avg_y(k - 1);
        const double tangent = std::atan2(dy, dx);
        const CogSample& c = cog[static_cast<std::size_t>(k)];
        out.push_back({c.t, wrap_angle(tangent - c.heading)});
    }
    return out;
}

struct CorneringOptions {
    int smoothing_window = 5;
    double steady_window_duration = 2.0;  // [s]
    double steady_cov_threshold = 0.05;   // yaw-rate std / |mean|
    double min_slip = 0.005;              // [rad]
    bool small_angle = true;  // false: front force keeps the cos(delta - alpha_v) factor
};

struct CorneringStiffnessFit {
    double C_v = 0.0;
    double C_h = 0.0;
    double slip_front = 0.0;   // averaged front slip angle [rad]
    double slip_rear = 0.0;    // averaged rear slip angle [rad]
    double beta_mean = 0.0;    // [rad]
    double psi_dot_mean = 0.0; // [rad/s]
    double v_mean = 0.0;       // [m/s]
    double a_y_mean = 0.0;     // [m/s^2]
    std::size_t window_begin = 0;  // sample index range of the steady window
    std::size_t window_end = 0;
};

/// Cornering stiffnesses from a steady-state circular run: axle lateral
/// forces from the lateral acceleration and the static weight split, slip
/// angles from the optically tracked drift angle, yaw rate and speed.
inline CorneringStiffnessFit cornering_stiffness(const CircularRunData& run, double m, double l_v,
                                                 double l_h,
                                                 const CorneringOptions& opt = {}) {
    const std::size_t n = run.markers.size();
    if (run.a_y.size() != n || run.psi_dot.size() != n || run.v.size() != n)
        throw GridMismatch("circular-run channels must align with the marker samples");
    if (n < static_cast<std::size_t>(opt.smoothing_window) + 2)
        throw TooFewSamples("circular run shorter than the smoothing window");

    const double dt = (run.markers.back().t - run.markers.front().t) / static_cast<double>(n - 1);
    if (!(dt > 0.0)) throw GridMismatch("marker timestamps must increase");
    for (std::size_t k = 1; k < n; ++k) {
        const double expected = run.markers.front().t + static_cast<double>(k) * dt;
        if (std::abs(run.markers[k].t - expected) > 0.5 * dt)
            throw GridMismatch("marker timestamps are not on a uniform grid");
    }

    // steady-state detection: sliding window over the yaw rate, low
    // coefficient of variation; the latest passing window wins
    const std::size_t win = static_cast<std::size_t>(
        std::max<long long>(2, std::llround(opt.steady_window_duration / dt)));
    if (win > n) throw NoSteadyWindow();
    std::optional<std::size_t> steady_begin;
    for (std::size_t start = 0; start + win <= n; ++start) {
        double mean = 0.0;
        for (std::size_t k = start; k < start + win; ++k) mean += run.psi_dot[k];
        mean /= static_cast<double>(win);
        double var = 0.0;
        for (std::size_t k = start; k < start + win; ++k) {
            const double d = run.psi_dot[k] - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / static_cast<double>(win));
        if (sd <= opt.steady_cov_threshold * std::abs(mean) + 1e-12) steady_begin = start;
    }
    if (!steady_begin) throw NoSteadyWindow();
    const std::size_t s0 = *steady_begin;
    const std::size_t s1 = s0 + win;

    CorneringStiffnessFit fit;
    fit.window_begin = s0;
    fit.window_end = s1;
    for (std::size_t k = s0; k < s1; ++k) {
        fit.a_y_mean += run.a_y[k];
        fit.psi_dot_mean += run.psi_dot[k];
        fit.v_mean += run.v[k];
    }
    const double wn = static_cast<double>(win);
    fit.a_y_mean /= wn;
    fit.psi_dot_mean /= wn;
    fit.v_mean /= wn;
    if (!(fit.v_mean > 0.0)) throw InvalidValue("mean speed over the steady window must be > 0");

    const std::vector<CogSample> cog = cog_track(run.markers, l_v, l_h);
    const std::vector<DriftSample> drift = drift_angle_series(cog, opt.smoothing_window);
    const double t0 = run.markers[s0].t;
    const double t1 = run.markers[s1 - 1].t;
    double beta_sum = 0.0;
    std::size_t beta_count = 0;
    for (const DriftSample& d : drift) {
        if (d.t >= t0 - 0.25 * dt && d.t <= t1 + 0.25 * dt) {
            beta_sum += d.beta;
            ++beta_count;
        }
    }
    if (beta_count == 0) throw TooFewSamples("no drift-angle samples inside the steady window");
    fit.beta_mean = beta_sum / static_cast<double>(beta_count);

    fit.slip_front = run.delta - fit.beta_mean - fit.psi_dot_mean * l_v / fit.v_mean;
    fit.slip_rear = -fit.beta_mean + fit.psi_dot_mean * l_h / fit.v_mean;
    if (std::abs(fit.slip_front) <= opt.min_slip) throw SlipTooSmall("front");
    if (std::abs(fit.slip_rear) <= opt.min_slip) throw SlipTooSmall("rear");

    const double l = l_v + l_h;
    double F_sv = (l_h / l) * m * fit.a_y_mean;
    if (!opt.small_angle) F_sv *= std::cos(run.delta - fit.slip_front);
    const double F_sh = (l_v / l) * m * fit.a_y_mean;
    fit.C_v = F_sv / fit.slip_front;
    fit.C_h = F_sh / fit.slip_rear;
    return fit;
}

}  // namespace singletrack
