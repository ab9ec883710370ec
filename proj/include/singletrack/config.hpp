#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "singletrack/errors.hpp"
#include "singletrack/types.hpp"

namespace singletrack {

/// Process / measurement / initial covariances, state order (v_x, v_y, psi_dot)
/// and measurement order (psi_dot, v_x).
struct NoiseConfig {
    Eigen::Matrix3d Q = Eigen::Vector3d(0.05, 0.01, 0.01).asDiagonal();
    Eigen::Matrix2d R = Eigen::Vector2d(0.125, 0.10).asDiagonal();
    Eigen::Matrix3d P0 = Eigen::Vector3d(0.1, 0.1, 0.1).asDiagonal();
};

/// Synthetic sensor noise used by the simulator; all values are stand-ins
/// the real system would calibrate, hence config-exposed.
struct SensorNoise {
    double sigma_psidot = 0.035;  // [rad/s]
    double sigma_vx = 0.05;       // [m/s]
    double sigma_ax = 0.05;       // [m/s^2]
    double sigma_ay = 0.05;       // [m/s^2]
    double bias_psidot = 0.0;
    double bias_vx = 0.0;
    double bias_ax = 0.0;
    double bias_ay = 0.0;
    std::uint64_t seed = 1;
};

struct Config {
    VehicleParams params;
    NoiseConfig noise;
    SensorNoise sensor_noise;
    double dt = 0.005;        // filter step [s]
    double v_min = 0.1;       // dynamic-model speed threshold [m/s]
    double delta_max = 0.6;   // steering limit [rad]
    int smoothing_window = 5; // tangent estimation window, odd, >= 3
    double g = 9.81;          // [m/s^2]
    double eps_den = 1e-9;    // discrete-model denominator guard
    bool bifilar_paper_constant = false;  // 16*pi*L instead of 16*pi^2*L
};

namespace detail {

inline void check_symmetric(const Eigen::MatrixXd& M, const char* name) {
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw ParseError(std::string(name) + " must be symmetric");
}

inline double min_eigenvalue(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    return es.eigenvalues().minCoeff();
}

}  // namespace detail

/// Checks the NoiseConfig invariants (symmetry, R positive definite,
/// Q and P0 positive semidefinite). Throws ParseError on violation.
inline void validate_noise(const NoiseConfig& noise) {
    detail::check_symmetric(noise.Q, "noise.Q");
    detail::check_symmetric(noise.R, "noise.R");
    detail::check_symmetric(noise.P0, "noise.P0");
    if (detail::min_eigenvalue(noise.R) <= 0.0)
        throw ParseError("noise.r_diag must be positive definite");
    if (detail::min_eigenvalue(noise.Q) < -1e-12)
        throw ParseError("noise.q_diag must be positive semidefinite");
    if (detail::min_eigenvalue(noise.P0) < -1e-12)
        throw ParseError("noise.p0_diag must be positive semidefinite");
}

namespace detail {

using json = nlohmann::json;

inline double require_number(const json& j, const std::string& key) {
    if (!j.at(key).is_number()) throw ParseError(key + " must be a number");
    return j.at(key).get<double>();
}

inline double number_or(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ParseError(key + " must be a number");
    return j.at(key).get<double>();
}

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                                const std::string& scope) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw ParseError("unknown key \"" + it.key() + "\" in " + scope);
    }
}

template <int N>
Eigen::Matrix<double, N, N> diag_from(const json& arr, const std::string& key) {
    if (!arr.is_array() || arr.size() != N)
        throw ParseError(key + " must be an array of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, N> M = Eigen::Matrix<double, N, N>::Zero();
    for (int i = 0; i < N; ++i) {
        if (!arr[i].is_number()) throw ParseError(key + " must contain numbers");
        M(i, i) = arr[i].get<double>();
    }
    return M;
}

}  // namespace detail

/// Parses a JSON config document. Only "params" is required; every other
/// key takes its documented default. Throws ParseError / NonPositiveParameter.
/// Non-fatal findings (currently the sigma_vx^2 > dt*sigma_ax^2 modeling
/// guideline) are appended to *warnings when given.
inline Config load_config(const std::string& text, std::vector<std::string>* warnings = nullptr) {
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!j.is_object()) throw ParseError("top level must be an object");
    detail::reject_unknown_keys(j,
                                {"params", "noise", "sensor_noise", "dt", "v_min", "delta_max",
                                 "smoothing_window", "g", "eps_den", "bifilar_paper_constant"},
                                "config");

    Config cfg;
    if (!j.contains("params") || !j.at("params").is_object())
        throw ParseError("missing required \"params\" object");
    const json& p = j.at("params");
    detail::reject_unknown_keys(p, {"m", "l_v", "l_h", "J_z", "C_v", "C_h"}, "params");
    VehicleParams raw;
    raw.m = detail::require_number(p, "m");
    raw.l_v = detail::require_number(p, "l_v");
    raw.l_h = detail::require_number(p, "l_h");
    raw.J_z = detail::require_number(p, "J_z");
    raw.C_v = detail::require_number(p, "C_v");
    raw.C_h = detail::require_number(p, "C_h");
    cfg.params = validate_params(raw);

    if (j.contains("noise")) {
        const json& n = j.at("noise");
        detail::reject_unknown_keys(n, {"q_diag", "r_diag", "p0_diag"}, "noise");
        if (n.contains("q_diag")) cfg.noise.Q = detail::diag_from<3>(n.at("q_diag"), "noise.q_diag");
        if (n.contains("r_diag")) cfg.noise.R = detail::diag_from<2>(n.at("r_diag"), "noise.r_diag");
        if (n.contains("p0_diag")) cfg.noise.P0 = detail::diag_from<3>(n.at("p0_diag"), "noise.p0_diag");
    }
    validate_noise(cfg.noise);

    if (j.contains("sensor_noise")) {
        const json& s = j.at("sensor_noise");
        detail::reject_unknown_keys(s,
                                    {"sigma_psidot", "sigma_vx", "sigma_ax", "sigma_ay",
                                     "bias_psidot", "bias_vx", "bias_ax", "bias_ay", "seed"},
                                    "sensor_noise");
        SensorNoise& sn = cfg.sensor_noise;
        sn.sigma_psidot = detail::number_or(s, "sigma_psidot", sn.sigma_psidot);
        sn.sigma_vx = detail::number_or(s, "sigma_vx", sn.sigma_vx);
        sn.sigma_ax = detail::number_or(s, "sigma_ax", sn.sigma_ax);
        sn.sigma_ay = detail::number_or(s, "sigma_ay", sn.sigma_ay);
        sn.bias_psidot = detail::number_or(s, "bias_psidot", sn.bias_psidot);
        sn.bias_vx = detail::number_or(s, "bias_vx", sn.bias_vx);
        sn.bias_ax = detail::number_or(s, "bias_ax", sn.bias_ax);
        sn.bias_ay = detail::number_or(s, "bias_ay", sn.bias_ay);
        if (s.contains("seed")) {
            if (!s.at("seed").is_number_unsigned()) throw ParseError("sensor_noise.seed must be a non-negative integer");
            sn.seed = s.at("seed").get<std::uint64_t>();
        }
        if (sn.sigma_psidot < 0 || sn.sigma_vx < 0 || sn.sigma_ax < 0 || sn.sigma_ay < 0)
            throw ParseError("sensor_noise sigmas must be >= 0");
    }

    cfg.dt = detail::number_or(j, "dt", cfg.dt);
    cfg.v_min = detail::number_or(j, "v_min", cfg.v_min);
    cfg.delta_max = detail::number_or(j, "delta_max", cfg.delta_max);
    cfg.g = detail::number_or(j, "g", cfg.g);
    cfg.eps_den = detail::number_or(j, "eps_den", cfg.eps_den);
    if (j.contains("smoothing_window")) {
        if (!j.at("smoothing_window").is_number_integer())
            throw ParseError("smoothing_window must be an integer");
        cfg.smoothing_window = j.at("smoothing_window").get<int>();
    }
    if (j.contains("bifilar_paper_constant")) {
        if (!j.at("bifilar_paper_constant").is_boolean())
            throw ParseError("bifilar_paper_constant must be a boolean");
        cfg.bifilar_paper_constant = j.at("bifilar_paper_constant").get<bool>();
    }

    if (!(cfg.dt > 0.0)) throw ParseError("dt must be > 0");
    if (!(cfg.v_min > 0.0)) throw ParseError("v_min must be > 0");
    if (!(cfg.delta_max > 0.0)) throw ParseError("delta_max must be > 0");
    if (!(cfg.g > 0.0)) throw ParseError("g must be > 0");
    if (!(cfg.eps_den > 0.0)) throw ParseError("eps_den must be > 0");
    if (cfg.smoothing_window < 3 || cfg.smoothing_window % 2 == 0)
        throw ParseError("smoothing_window must be odd and >= 3");

    // Modeling guideline, not a hard constraint: the v_x process variance
    // should dominate the accelerometer noise it absorbs.
    if (warnings && cfg.noise.Q(0, 0) <= cfg.dt * cfg.sensor_noise.sigma_ax * cfg.sensor_noise.sigma_ax) {
        warnings->push_back(
            "noise.q_diag[0] <= dt * sigma_ax^2; the v_x process variance should "
            "exceed the integrated accelerometer noise");
    }
    return cfg;
}

/// Serializes a Config into the JSON document format accepted by load_config.
/// Doubles use shortest-round-trip formatting, so load(render(c)) reproduces
/// every field bit-exactly. Only the diagonal of Q/R/P0 is representable.
inline std::string render_config(const Config& cfg) {
    detail::json j;
    j["params"] = {{"m", cfg.params.m},   {"l_v", cfg.params.l_v}, {"l_h", cfg.params.l_h},
                   {"J_z", cfg.params.J_z}, {"C_v", cfg.params.C_v}, {"C_h", cfg.params.C_h}};
    j["noise"]["q_diag"] = {cfg.noise.Q(0, 0), cfg.noise.Q(1, 1), cfg.noise.Q(2, 2)};
    j["noise"]["r_diag"] = {cfg.noise.R(0, 0), cfg.noise.R(1, 1)};
    j["noise"]["p0_diag"] = {cfg.noise.P0(0, 0), cfg.noise.P0(1, 1), cfg.noise.P0(2, 2)};
    j["sensor_noise"] = {{"sigma_psidot", cfg.sensor_noise.sigma_psidot},
                         {"sigma_vx", cfg.sensor_noise.sigma_vx},
                         {"sigma_ax", cfg.sensor_noise.sigma_ax},
                         {"sigma_ay", cfg.sensor_noise.sigma_ay},
                         {"bias_psidot", cfg.sensor_noise.bias_psidot},
                         {"bias_vx", cfg.sensor_noise.bias_vx},
                         {"bias_ax", cfg.sensor_noise.bias_ax},
                         {"bias_ay", cfg.sensor_noise.bias_ay},
                         {"seed", cfg.sensor_noise.seed}};
    j["dt"] = cfg.dt;
    j["v_min"] = cfg.v_min;
    j["delta_max"] = cfg.delta_max;
    j["smoothing_window"] = cfg.smoothing_window;
    j["g"] = cfg.g;
    j["eps_den"] = cfg.eps_den;
    j["bifilar_paper_constant"] = cfg.bifilar_paper_constant;
    return j.dump(2);
}

}  // namespace singletrack
