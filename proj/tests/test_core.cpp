#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "singletrack/angles.hpp"
#include "singletrack/config.hpp"
#include "singletrack/types.hpp"

using namespace singletrack;

TEST_CASE("validate_params accepts all-positive parameters") {
    VehicleParams p{4.0, 0.18, 0.18, 0.05, 50.0, 50.0};
    REQUIRE_NOTHROW(validate_params(p));
    const VehicleParams out = validate_params(p);
    CHECK(out.m == 4.0);
    CHECK(out.wheelbase() == Catch::Approx(0.36));
}

TEST_CASE("validate_params names the first violated field") {
    VehicleParams p{4.0, 0.18, 0.18, 0.05, 50.0, 50.0};
    p.m = 0.0;
    CHECK_THROWS_MATCHES(validate_params(p), NonPositiveParameter,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("m")));
    p.m = 4.0;
    p.C_h = -50.0;
    try {
        validate_params(p);
        FAIL("expected NonPositiveParameter");
    } catch (const NonPositiveParameter& e) {
        CHECK(e.name == "C_h");
    }
}

TEST_CASE("validate_params accepts exactly the all-positive orthant") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mag(1e-6, 100.0);
    for (int trial = 0; trial < 200; ++trial) {
        const unsigned mask = static_cast<unsigned>(rng() % 64);
        VehicleParams p;
        double* fields[6] = {&p.m, &p.l_v, &p.l_h, &p.J_z, &p.C_v, &p.C_h};
        for (int i = 0; i < 6; ++i) {
            const double v = mag(rng);
            *fields[i] = (mask & (1u << i)) ? -v : v;
        }
        if (mask == 0)
            CHECK_NOTHROW(validate_params(p));
        else
            CHECK_THROWS_AS(validate_params(p), NonPositiveParameter);
    }
}

TEST_CASE("wrap_angle examples") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(kPi + 0.1) == Catch::Approx(-kPi + 0.1).margin(1e-15));
    CHECK(wrap_angle(-3.0 * kPi) == Catch::Approx(kPi).margin(1e-15));
    CHECK(wrap_angle(kPi) == kPi);    // boundary included
    CHECK(wrap_angle(-kPi) == kPi);   // boundary excluded on the negative side
}

TEST_CASE("wrap_angle is idempotent and 2*pi periodic") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(-50.0, 50.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const double x = angle(rng);
        const double w = wrap_angle(x);
        CHECK(w > -kPi);
        CHECK(w <= kPi);
        CHECK(wrap_angle(w) == w);
        for (int k = -10; k <= 10; ++k) {
            CHECK(wrap_angle(x + kTwoPi * k) == Catch::Approx(w).margin(1e-12));
        }
    }
}

TEST_CASE("load_config fills defaults from a params-only document") {
    const std::string doc = R"({"params": {"m": 4.0, "l_v": 0.18, "l_h": 0.18,
                                           "J_z": 0.05, "C_v": 50.0, "C_h": 50.0}})";
    const Config cfg = load_config(doc);
    CHECK(cfg.dt == 0.005);
    CHECK(cfg.v_min == 0.1);
    CHECK(cfg.delta_max == 0.6);
    CHECK(cfg.smoothing_window == 5);
    CHECK(cfg.g == 9.81);
    CHECK(cfg.noise.Q(0, 0) == 0.05);
    CHECK(cfg.noise.Q(1, 1) == 0.01);
    CHECK(cfg.noise.Q(2, 2) == 0.01);
    CHECK(cfg.noise.R(0, 0) == 0.125);
    CHECK(cfg.noise.R(1, 1) == 0.10);
}

TEST_CASE("load_config rejects bad documents") {
    const std::string params = R"("params": {"m": 4.0, "l_v": 0.18, "l_h": 0.18,
                                             "J_z": 0.05, "C_v": 50.0, "C_h": 50.0})";
    CHECK_THROWS_AS(load_config("{" + params + R"(, "dt": -1})"), ParseError);
    CHECK_THROWS_AS(load_config("not json"), ParseError);
    CHECK_THROWS_AS(load_config("{}"), ParseError);  // params required
    CHECK_THROWS_AS(load_config("{" + params + R"(, "smoothing_window": 4})"), ParseError);
    CHECK_THROWS_AS(load_config("{" + params + R"(, "vmin": 0.2})"), ParseError);  // typo
    CHECK_THROWS_AS(load_config(R"({"params": {"m": -4.0, "l_v": 0.18, "l_h": 0.18,
                                               "J_z": 0.05, "C_v": 50.0, "C_h": 50.0}})"),
                    NonPositiveParameter);
    CHECK_THROWS_AS(
        load_config("{" + params + R"(, "noise": {"r_diag": [0.0, 0.1]}})"),
        ParseError);  // R must be positive definite
}

TEST_CASE("load_config parses explicit covariance diagonals") {
    const std::string doc = R"({
        "params": {"m": 4.0, "l_v": 0.18, "l_h": 0.18, "J_z": 0.05, "C_v": 50.0, "C_h": 50.0},
        "noise": {"q_diag": [0.05, 0.01, 0.01], "r_diag": [0.125, 0.10]}
    })";
    const Config cfg = load_config(doc);
    CHECK(cfg.noise.Q(0, 0) == 0.05);
    CHECK(cfg.noise.Q(1, 1) == 0.01);
    CHECK(cfg.noise.Q(2, 2) == 0.01);
    CHECK(cfg.noise.Q(0, 1) == 0.0);
    CHECK(cfg.noise.R(0, 0) == 0.125);
    CHECK(cfg.noise.R(1, 1) == 0.10);
}

TEST_CASE("load_config warns when q_diag[0] violates the accelerometer guideline") {
    const std::string doc = R"({
        "params": {"m": 4.0, "l_v": 0.18, "l_h": 0.18, "J_z": 0.05, "C_v": 50.0, "C_h": 50.0},
        "noise": {"q_diag": [1e-9, 0.01, 0.01]},
        "sensor_noise": {"sigma_ax": 1.0}
    })";
    std::vector<std::string> warnings;
    const Config cfg = load_config(doc, &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("sigma_ax") != std::string::npos);
    CHECK(cfg.noise.Q(0, 0) == 1e-9);

    warnings.clear();
    load_config(R"({"params": {"m": 4.0, "l_v": 0.18, "l_h": 0.18,
                               "J_z": 0.05, "C_v": 50.0, "C_h": 50.0}})",
                &warnings);
    CHECK(warnings.empty());
}

TEST_CASE("config render/load round-trips bit-exactly") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> mag(1e-4, 1e3);
    std::uniform_real_distribution<double> small(1e-8, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Config cfg;
        cfg.params = {mag(rng), mag(rng), mag(rng), mag(rng), mag(rng), mag(rng)};
        cfg.noise.Q = Eigen::Vector3d(small(rng), small(rng), small(rng)).asDiagonal();
        cfg.noise.R = Eigen::Vector2d(small(rng), small(rng)).asDiagonal();
        cfg.noise.P0 = Eigen::Vector3d(small(rng), small(rng), small(rng)).asDiagonal();
        cfg.dt = small(rng);
        cfg.v_min = small(rng);
        cfg.delta_max = small(rng);
        cfg.smoothing_window = 3 + 2 * static_cast<int>(rng() % 5);
        cfg.g = mag(rng);
        cfg.eps_den = small(rng);
        cfg.sensor_noise.sigma_psidot = small(rng);
        cfg.sensor_noise.sigma_vx = small(rng);
        cfg.sensor_noise.sigma_ax = small(rng);
        cfg.sensor_noise.sigma_ay = small(rng);
        cfg.sensor_noise.bias_psidot = small(rng) - 0.5;
        cfg.sensor_noise.seed = rng();
        cfg.bifilar_paper_constant = (rng() % 2) == 0;

        const Config back = load_config(render_config(cfg));
        CHECK(back.params.m == cfg.params.m);
        CHECK(back.params.l_v == cfg.params.l_v);
        CHECK(back.params.l_h == cfg.params.l_h);
        CHECK(back.params.J_z == cfg.params.J_z);
        CHECK(back.params.C_v == cfg.params.C_v);
        CHECK(back.params.C_h == cfg.params.C_h);
        CHECK(back.noise.Q == cfg.noise.Q);
        CHECK(back.noise.R == cfg.noise.R);
        CHECK(back.noise.P0 == cfg.noise.P0);
        CHECK(back.dt == cfg.dt);
        CHECK(back.v_min == cfg.v_min);
        CHECK(back.delta_max == cfg.delta_max);
        CHECK(back.smoothing_window == cfg.smoothing_window);
        CHECK(back.g == cfg.g);
        CHECK(back.eps_den == cfg.eps_den);
        CHECK(back.sensor_noise.sigma_psidot == cfg.sensor_noise.sigma_psidot);
        CHECK(back.sensor_noise.sigma_vx == cfg.sensor_noise.sigma_vx);
        CHECK(back.sensor_noise.sigma_ax == cfg.sensor_noise.sigma_ax);
        CHECK(back.sensor_noise.sigma_ay == cfg.sensor_noise.sigma_ay);
        CHECK(back.sensor_noise.bias_psidot == cfg.sensor_noise.bias_psidot);
        CHECK(back.sensor_noise.seed == cfg.sensor_noise.seed);
        CHECK(back.bifilar_paper_constant == cfg.bifilar_paper_constant);
    }
}
