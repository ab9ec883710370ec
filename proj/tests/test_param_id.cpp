#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "singletrack/param_id.hpp"
#include "singletrack/sim.hpp"

using namespace singletrack;

namespace {

const VehicleParams kCar{4.0, 0.18, 0.18, 0.05, 50.0, 50.0};

/// Markers for uniform circular motion of the CoG with a fixed drift angle:
/// the body axis points beta to the right of the velocity direction.
std::vector<MarkerRecord> circle_markers(double radius, double yaw_rate, double beta, double l_v,
                                         double l_h, double dt, std::size_t n,
                                         double cx = 0.0, double cy = 0.0, double phase = 0.0) {
    std::vector<MarkerRecord> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double phi = phase + yaw_rate * t;
        const double x = cx + radius * std::cos(phi);
        const double y = cy + radius * std::sin(phi);
        const double tangent = phi + kPi / 2.0;  // counterclockwise motion
        const double heading = tangent - beta;
        MarkerRecord m;
        m.t = t;
        m.x_front = x + l_v * std::cos(heading);
        m.y_front = y + l_v * std::sin(heading);
        m.x_rear = x - l_h * std::cos(heading);
        m.y_rear = y - l_h * std::sin(heading);
        out.push_back(m);
    }
    return out;
}

}  // namespace

TEST_CASE("cog_from_scale examples") {
    SECTION("symmetric mass") {
        const double w = 4.0 * 9.81;
        const auto [l_v, l_h] = cog_from_scale(AxleLoads{w / 2, w / 2}, 0.36, 4.0, 9.81);
        CHECK(l_v == Catch::Approx(0.18).epsilon(1e-14));
        CHECK(l_h == Catch::Approx(0.18).epsilon(1e-14));
    }
    SECTION("all weight on the front axle") {
        const double w = 4.0 * 9.81;
        const auto [l_v, l_h] = cog_from_scale(AxleLoads{w, 0.0}, 0.36, 4.0, 9.81);
        CHECK(l_v == 0.0);
        CHECK(l_h == Catch::Approx(0.36).epsilon(1e-14));
    }
    SECTION("frozen hand evaluation") {
        const auto [l_v, l_h] = cog_from_scale(AxleLoads{19.62, 19.62}, 0.36, 4.0, 9.81);
        CHECK(l_h == Catch::Approx(0.18).epsilon(1e-14));  // 19.62 * 0.36 / 39.24
    }
    SECTION("inconsistent loads are rejected") {
        const double w = 4.0 * 9.81;
        CHECK_THROWS_AS(cog_from_scale(AxleLoads{0.55 * w, 0.55 * w}, 0.36, 4.0, 9.81),
                        InconsistentLoads);
    }
}

TEST_CASE("cog_from_scale distances always sum to the wheelbase") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> split(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double m = 1.0 + 10.0 * split(rng);
        const double g = 9.81;
        const double l = 0.2 + split(rng);
        const double f = split(rng);
        const auto [l_v, l_h] = cog_from_scale(AxleLoads{f * m * g, (1.0 - f) * m * g}, l, m, g);
        CHECK(l_v + l_h == Catch::Approx(l).margin(1e-14));
    }
}

TEST_CASE("mean_period examples") {
    CHECK(mean_period(std::vector<double>{0.0, 2.0}) == 2.0);
    CHECK(mean_period(std::vector<double>{0.0, 2.0, 4.1, 5.9}) ==
          Catch::Approx(5.9 / 3.0).epsilon(1e-14));
    CHECK(mean_period(std::vector<double>{0, 1, 2, 3, 4}) == 1.0);
    CHECK_THROWS_AS(mean_period(std::vector<double>{5.0}), TooFewCycles);
    CHECK_THROWS_AS(mean_period(std::vector<double>{0.0, 0.0}), InvalidValue);
}

TEST_CASE("inertia_bifilar frozen values and scaling laws") {
    PendulumSetup setup;
    setup.m = 4.0;
    setup.D = 0.2;
    setup.L = 1.0;
    setup.cycle_times = {0.0, 2.0, 4.0, 6.0};  // T = 2 s

    // frozen: 4 * 9.81 * 0.04 * 4 / (16 pi^2)
    CHECK(inertia_bifilar(setup, 9.81) == Catch::Approx(0.03975843246125335).epsilon(1e-12));
    CHECK(inertia_bifilar(setup, 9.81, true) ==
          Catch::Approx(0.12490479933851949).epsilon(1e-12));

    PendulumSetup doubled_T = setup;
    doubled_T.cycle_times = {0.0, 4.0, 8.0, 12.0};
    CHECK(inertia_bifilar(doubled_T, 9.81) ==
          Catch::Approx(4.0 * inertia_bifilar(setup, 9.81)).epsilon(1e-12));

    PendulumSetup doubled_D = setup;
    doubled_D.D = 0.4;
    CHECK(inertia_bifilar(doubled_D, 9.81) ==
          Catch::Approx(4.0 * inertia_bifilar(setup, 9.81)).epsilon(1e-12));

    PendulumSetup empty = setup;
    empty.cycle_times = {0.0};
    CHECK_THROWS_AS(inertia_bifilar(empty, 9.81), TooFewCycles);
}

TEST_CASE("inertia_bifilar is monotone in m, D, T and 1/L") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        PendulumSetup s;
        s.m = u(rng);
        s.D = u(rng);
        s.L = u(rng);
        const double T = u(rng);
        s.cycle_times = {0.0, T, 2 * T};
        const double base = inertia_bifilar(s, 9.81);

        PendulumSetup larger = s;
        larger.m *= 1.1;
        CHECK(inertia_bifilar(larger, 9.81) > base);
        larger = s;
        larger.D *= 1.1;
        CHECK(inertia_bifilar(larger, 9.81) > base);
        larger = s;
        larger.L *= 1.1;
        CHECK(inertia_bifilar(larger, 9.81) < base);
        larger = s;
        larger.cycle_times = {0.0, 1.1 * T, 2.2 * T};
        CHECK(inertia_bifilar(larger, 9.81) > base);
    }
}

TEST_CASE("cog_track examples") {
    SECTION("midpoint for a centered CoG") {
        std::vector<MarkerRecord> markers{{0.0, 1.0, 0.0, 0.0, 0.0},
                                          {0.1, 1.1, 0.0, 0.1, 0.0}};
        const auto cog = cog_track(markers, 0.5, 0.5);
        CHECK(cog[0].x == Catch::Approx(0.5).margin(1e-15));
        CHECK(cog[0].y == Catch::Approx(0.0).margin(1e-15));
        CHECK(cog[0].heading == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("vertical axis") {
        std::vector<MarkerRecord> markers{{0.0, 0.0, 1.0, 0.0, 0.0},
                                          {0.1, 0.0, 1.1, 0.0, 0.1}};
        const auto cog = cog_track(markers, 0.5, 0.5);
        CHECK(cog[0].heading == Catch::Approx(kPi / 2).margin(1e-15));
    }
    SECTION("coincident markers are rejected") {
        std::vector<MarkerRecord> markers{{0.0, 1.0, 1.0, 1.0, 1.0},
                                          {0.1, 1.0, 1.0, 1.0, 1.0}};
        CHECK_THROWS_AS(cog_track(markers, 0.5, 0.5), DegenerateMarkers);
    }
    SECTION("separation off nominal by more than 5% is rejected") {
        std::vector<MarkerRecord> markers{{0.0, 1.2, 0.0, 0.0, 0.0},
                                          {0.1, 1.3, 0.0, 0.1, 0.0}};
        CHECK_THROWS_AS(cog_track(markers, 0.5, 0.5), InvalidValue);
    }
}

TEST_CASE("cog_track recovers a synthetic circle exactly") {
    const double radius = 1.5, yaw_rate = 0.8, beta = 0.05;
    const auto markers = circle_markers(radius, yaw_rate, beta, kCar.l_v, kCar.l_h, 0.005, 400);
    const auto cog = cog_track(markers, kCar.l_v, kCar.l_h);
    for (std::size_t k = 0; k < cog.size(); ++k) {
        const double phi = yaw_rate * cog[k].t;
        CHECK(std::abs(cog[k].x - radius * std::cos(phi)) < 1e-9);
        CHECK(std::abs(cog[k].y - radius * std::sin(phi)) < 1e-9);
    }
}

TEST_CASE("drift_angle_series examples") {
    SECTION("motion along +x with heading 0 has no drift") {
        std::vector<CogSample> cog;
        for (int k = 0; k < 20; ++k) cog.push_back({0.01 * k, 0.5 * 0.01 * k, 0.0, 0.0});
        const auto drift = drift_angle_series(cog, 5);
        REQUIRE(!drift.empty());
        for (const auto& d : drift) CHECK(std::abs(d.beta) < 1e-12);
    }
    SECTION("velocity a constant 0.05 rad left of the heading") {
        // straight motion at angle 0.05, heading 0 -> beta = +0.05 throughout
        std::vector<CogSample> cog;
        for (int k = 0; k < 20; ++k) {
            const double s = 0.01 * k;
            cog.push_back({s, s * std::cos(0.05), s * std::sin(0.05), 0.0});
        }
        const auto drift = drift_angle_series(cog, 5);
        for (const auto& d : drift) CHECK(d.beta == Catch::Approx(0.05).margin(1e-12));
    }
    SECTION("too few samples") {
        std::vector<CogSample> cog(6);
        CHECK_THROWS_AS(drift_angle_series(cog, 5), TooFewSamples);
        CHECK_THROWS_AS(drift_angle_series(cog, 4), InvalidValue);  // even window
    }
}

TEST_CASE("drift angles are invariant under rigid motion of the world frame") {
    const auto base = circle_markers(1.2, 0.9, 0.07, kCar.l_v, kCar.l_h, 0.005, 300);
    const auto drift_base = drift_angle_series(cog_track(base, kCar.l_v, kCar.l_h), 5);

    const double theta = 1.234, tx = -3.7, ty = 12.2;
    std::vector<MarkerRecord> moved = base;
    for (auto& m : moved) {
        auto rot = [&](double& x, double& y) {
            const double xr = std::cos(theta) * x - std::sin(theta) * y + tx;
            const double yr = std::sin(theta) * x + std::cos(theta) * y + ty;
            x = xr;
            y = yr;
        };
        rot(m.x_front, m.y_front);
        rot(m.x_rear, m.y_rear);
    }
    const auto drift_moved = drift_angle_series(cog_track(moved, kCar.l_v, kCar.l_h), 5);
    REQUIRE(drift_base.size() == drift_moved.size());
    for (std::size_t k = 0; k < drift_base.size(); ++k)
        CHECK(drift_moved[k].beta == Catch::Approx(drift_base[k].beta).margin(1e-10));
}

TEST_CASE("drift angles from simulated markers match the simulator's sideslip") {
    const Scenario sc = make_steady_circle(10.0, 1.0, 0.3);
    const auto truth = simulate(sc, kCar, 0.0005);
    const MarkerExportOptions opts{kCar.l_v, kCar.l_h, 0.0, 7};
    const auto markers = export_markers(truth, 0.005, opts);
    const auto drift = drift_angle_series(cog_track(markers, kCar.l_v, kCar.l_h), 5);
    const auto truth_f = resample_truth(truth, 0.005);

    std::size_t checked = 0;
    for (const auto& d : drift) {
        if (d.t < 3.0) continue;  // let the transient die
        const std::size_t k = static_cast<std::size_t>(std::llround(d.t / 0.005));
        const double beta_true = std::atan2(truth_f[k].vel.v_y, truth_f[k].vel.v_x);
        CHECK(std::abs(d.beta - beta_true) < 0.005);
        ++checked;
    }
    CHECK(checked > 1000);
}

TEST_CASE("cornering_stiffness inverts constructed steady-state data") {
    // delta - beta - psi_dot*l_v/v = 0.05 and F_sv = 2.5 N  =>  C_v = 50
    const double delta = 0.3, yaw_rate = 1.0, v = 1.0, beta = 0.07;
    const double radius = v / yaw_rate;
    const double a_y = 2.5 * (kCar.l_v + kCar.l_h) / (kCar.l_h * kCar.m);
    const std::size_t n = 601;  // 3 s at 200 Hz
    CircularRunData run;
    run.markers = circle_markers(radius, yaw_rate, beta, kCar.l_v, kCar.l_h, 0.005, n);
    run.a_y.assign(n, a_y);
    run.psi_dot.assign(n, yaw_rate);
    run.v.assign(n, v);
    run.delta = delta;

    const auto fit = cornering_stiffness(run, kCar.m, kCar.l_v, kCar.l_h);
    CHECK(fit.slip_front == Catch::Approx(0.05).margin(1e-9));
    CHECK(fit.C_v == Catch::Approx(50.0).epsilon(1e-6));
    CHECK(fit.C_h == Catch::Approx(2.5 / 0.11).epsilon(1e-6));
}

TEST_CASE("cornering_stiffness error paths") {
    SECTION("zero rear slip") {
        // straight drive: beta = 0 and psi_dot = 0, steering still nonzero
        const std::size_t n = 601;
        CircularRunData run;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = 0.005 * static_cast<double>(k);
            MarkerRecord m;
            m.t = t;
            m.x_front = t + kCar.l_v;
            m.y_front = 0.0;
            m.x_rear = t - kCar.l_h;
            m.y_rear = 0.0;
            run.markers.push_back(m);
        }
        run.a_y.assign(n, 0.5);
        run.psi_dot.assign(n, 0.0);
        run.v.assign(n, 1.0);
        run.delta = 0.3;
        CHECK_THROWS_AS(cornering_stiffness(run, kCar.m, kCar.l_v, kCar.l_h), SlipTooSmall);
    }
    SECTION("no steady window in a ramping yaw rate") {
        const std::size_t n = 601;
        CircularRunData run;
        run.markers = circle_markers(1.0, 1.0, 0.05, kCar.l_v, kCar.l_h, 0.005, n);
        for (std::size_t k = 0; k < n; ++k)
            run.psi_dot.push_back(static_cast<double>(k) / static_cast<double>(n));
        run.a_y.assign(n, 1.0);
        run.v.assign(n, 1.0);
        run.delta = 0.3;
        CHECK_THROWS_AS(cornering_stiffness(run, kCar.m, kCar.l_v, kCar.l_h), NoSteadyWindow);
    }
}

TEST_CASE("cornering stiffness round trip on simulated data") {
    const Scenario sc = make_steady_circle(30.0, 1.0, 0.3);
    const auto truth = simulate(sc, kCar, 0.0005);
    SensorNoise quiet;
    quiet.sigma_psidot = quiet.sigma_vx = quiet.sigma_ax = quiet.sigma_ay = 0.0;

    SECTION("noise-free recovery within 10%") {
        const MarkerExportOptions opts{kCar.l_v, kCar.l_h, 0.0, 77};
        const CircularRunData run = synthesize_circular_run(truth, quiet, 0.005, opts);
        const auto fit = cornering_stiffness(run, kCar.m, kCar.l_v, kCar.l_h);
        CHECK(std::abs(fit.C_v - kCar.C_v) / kCar.C_v < 0.10);
        CHECK(std::abs(fit.C_h - kCar.C_h) / kCar.C_h < 0.10);
    }
    SECTION("1 mm marker noise still recovers within 25%") {
        const MarkerExportOptions opts{kCar.l_v, kCar.l_h, 0.001, 42};
        const CircularRunData run = synthesize_circular_run(truth, quiet, 0.005, opts);
        const auto fit = cornering_stiffness(run, kCar.m, kCar.l_v, kCar.l_h);
        CHECK(std::abs(fit.C_v - kCar.C_v) / kCar.C_v < 0.25);
        CHECK(std::abs(fit.C_h - kCar.C_h) / kCar.C_h < 0.25);
    }
}
