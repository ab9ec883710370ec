// Command-line front end: simulate scenarios, run the estimator over sensor
// logs, identify vehicle parameters from experiment logs, and compute
// validation metrics. Outputs are CSV plus key=value summary lines.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "singletrack/singletrack.hpp"

namespace st = singletrack;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

st::Config load_config_file(const std::string& path) {
    if (path.empty()) return st::Config{};
    std::ifstream in(path);
    if (!in) throw st::ParseError("cannot open config \"" + path + "\"");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::string> warnings;
    const st::Config cfg = st::load_config(text, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    return cfg;
}

// ---- CSV adapters for the documented log schemas ----

void write_truth(const std::string& path, const std::vector<st::TruthRecord>& records) {
    st::csv::Table t;
    t.columns = {"t_s", "X_m", "Y_m", "psi_rad", "v_x_mps", "v_y_mps", "psidot_radps",
                 "a_y_mps2"};
    for (const auto& r : records)
        t.rows.push_back({r.t, r.pose.X, r.pose.Y, r.pose.psi, r.vel.v_x, r.vel.v_y,
                          r.vel.psi_dot, r.a_y});
    st::csv::write_file(path, t);
}

std::vector<st::TruthRecord> read_truth(const std::string& path) {
    const st::csv::Table t = st::csv::read_file(path);
    const std::size_t it = t.column_index("t_s"), ix = t.column_index("X_m"),
                      iy = t.column_index("Y_m"), ip = t.column_index("psi_rad"),
                      ivx = t.column_index("v_x_mps"), ivy = t.column_index("v_y_mps"),
                      ipd = t.column_index("psidot_radps"), iay = t.column_index("a_y_mps2");
    std::vector<st::TruthRecord> out;
    out.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        st::TruthRecord rec;
        rec.t = r[it];
        rec.pose = {r[ix], r[iy], r[ip]};
        rec.vel = {r[ivx], r[ivy], r[ipd]};
        rec.a_y = r[iay];
        out.push_back(rec);
    }
    return out;
}

void write_sensors(const std::string& path, const std::vector<st::SensorRecord>& records) {
    st::csv::Table t;
    t.columns = {"t_s", "delta_rad", "a_x_mps2", "a_y_mps2", "v_x_meas_mps",
                 "psidot_meas_radps"};
    for (const auto& r : records)
        t.rows.push_back({r.t, r.delta, r.a_x, r.a_y, r.v_x_meas, r.psi_dot_meas});
    st::csv::write_file(path, t);
}

std::vector<st::SensorRecord> read_sensors(const std::string& path) {
    const st::csv::Table t = st::csv::read_file(path);
    const std::size_t it = t.column_index("t_s"), id = t.column_index("delta_rad"),
                      iax = t.column_index("a_x_mps2"), iay = t.column_index("a_y_mps2"),
                      ivx = t.column_index("v_x_meas_mps"),
                      ipd = t.column_index("psidot_meas_radps");
    std::vector<st::SensorRecord> out;
    out.reserve(t.rows.size());
    for (const auto& r : t.rows)
        out.push_back({r[it], r[id], r[iax], r[iay], r[ivx], r[ipd]});
    return out;
}

void write_markers(const std::string& path, const std::vector<st::MarkerRecord>& markers) {
    st::csv::Table t;
    t.columns = {"t_s", "x_front_m", "y_front_m", "x_rear_m", "y_rear_m"};
    for (const auto& m : markers)
        t.rows.push_back({m.t, m.x_front, m.y_front, m.x_rear, m.y_rear});
    st::csv::write_file(path, t);
}

void write_circular(const std::string& path, const st::CircularRunData& run) {
    st::csv::Table t;
    t.columns = {"t_s", "x_front_m", "y_front_m", "x_rear_m", "y_rear_m",
                 "a_y_mps2", "psidot_radps", "v_mps", "delta_rad"};
    for (std::size_t k = 0; k < run.markers.size(); ++k) {
        const st::MarkerRecord& m = run.markers[k];
        t.rows.push_back({m.t, m.x_front, m.y_front, m.x_rear, m.y_rear, run.a_y[k],
                          run.psi_dot[k], run.v[k], run.delta});
    }
    st::csv::write_file(path, t);
}

st::CircularRunData read_circular(const std::string& path) {
    const st::csv::Table t = st::csv::read_file(path);
    const std::size_t it = t.column_index("t_s"), ixf = t.column_index("x_front_m"),
                      iyf = t.column_index("y_front_m"), ixr = t.column_index("x_rear_m"),
                      iyr = t.column_index("y_rear_m"), iay = t.column_index("a_y_mps2"),
                      ipd = t.column_index("psidot_radps"), iv = t.column_index("v_mps"),
                      id = t.column_index("delta_rad");
    st::CircularRunData run;
    double delta_sum = 0.0;
    for (const auto& r : t.rows) {
        run.markers.push_back({r[it], r[ixf], r[iyf], r[ixr], r[iyr]});
        run.a_y.push_back(r[iay]);
        run.psi_dot.push_back(r[ipd]);
        run.v.push_back(r[iv]);
        delta_sum += r[id];
    }
    if (run.markers.empty()) throw st::EmptyTrajectory();
    run.delta = delta_sum / static_cast<double>(run.markers.size());
    return run;
}

void write_estimate(const std::string& path, const std::vector<st::EstimateRow>& rows) {
    st::csv::Table t;
    t.columns = {"t_s", "X_m", "Y_m", "psi_rad", "v_x_mps", "v_y_mps", "psidot_radps",
                 "P_vx_m2ps2", "P_vy_m2ps2", "P_psidot_rad2ps2"};
    for (const auto& r : rows)
        t.rows.push_back({r.t, r.pose.X, r.pose.Y, r.pose.psi, r.vel.v_x, r.vel.v_y,
                          r.vel.psi_dot, r.p_vx, r.p_vy, r.p_psidot});
    st::csv::write_file(path, t);
}

std::vector<st::Pose> read_poses(const std::string& path) {
    const st::csv::Table t = st::csv::read_file(path);
    const std::size_t ix = t.column_index("X_m"), iy = t.column_index("Y_m"),
                      ip = t.column_index("psi_rad");
    std::vector<st::Pose> out;
    out.reserve(t.rows.size());
    for (const auto& r : t.rows) out.push_back({r[ix], r[iy], r[ip]});
    return out;
}

std::vector<st::PoseReset> read_pose_resets(const std::string& path) {
    const st::csv::Table t = st::csv::read_file(path);
    const std::size_t it = t.column_index("t_s"), ix = t.column_index("X_m"),
                      iy = t.column_index("Y_m"), ip = t.column_index("psi_rad");
    std::vector<st::PoseReset> out;
    for (const auto& r : t.rows) out.push_back({r[it], {r[ix], r[iy], r[ip]}});
    return out;
}

std::vector<double> read_cycle_times(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw st::ParseError("cannot open \"" + path + "\"");
    std::vector<double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        out.push_back(st::csv::parse_double(line, line_no, 0));
    }
    return out;
}

void print_closure(const st::ClosureMetrics& m) {
    std::printf("path_length_m=%.9g\n", m.path_length);
    std::printf("position_closure_m=%.9g\n", m.position_closure);
    std::printf("closure_per_meter=%.9g\n", m.closure_per_meter);
    std::printf("yaw_closure_rad=%.9g\n", m.yaw_closure);
}

// ---- subcommand state ----

struct SimulateArgs {
    std::string config_path, scenario = "steady_circle";
    double duration = 10.0, v_target = 1.0, delta = 0.2, step_time = 1.0;
    double dt_truth = 0.0005, dt_sensor = 0.0;
    double mismatch = 0.0;
    double marker_sigma = 0.0;
    double marker_front = 0.0, marker_rear = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t marker_seed = 12345;
    std::string out_truth, out_sensors, out_markers, out_circular;
};

struct EstimateArgs {
    std::string config_path, input, output, model = "dynamic-ekf", reset_log;
    bool bench = false;
};

struct CogArgs {
    double fgv = 0.0, fgh = 0.0, wheelbase = 0.0, mass = 0.0, g = 9.81;
    double fleft = -1.0, fright = -1.0, track = 0.0;
};

struct InertiaArgs {
    std::string config_path, input;
    double cord_distance = 0.0, cord_length = 0.0, mass = 0.0;
    double g = 0.0;  // 0 = take from config (default 9.81)
    bool paper_constant = false;
};

struct CorneringArgs {
    std::string config_path, input;
    bool full_angle = false;
};

struct ClosureArgs {
    std::string input;
};

struct HorizonArgs {
    std::string config_path, truth, sensors, est, model = "dynamic";
    int horizon = 7;
};

void run_simulate(const SimulateArgs& a) {
    const st::Config cfg = load_config_file(a.config_path);
    st::VehicleParams truth_params = cfg.params;
    if (a.mismatch != 0.0) {
        truth_params.C_v *= 1.0 + a.mismatch;
        truth_params.C_h *= 1.0 - a.mismatch;
        truth_params.J_z *= 1.0 + a.mismatch;
        st::validate_params(truth_params);
    }

    st::Scenario scenario;
    if (a.scenario == "straight")
        scenario = st::make_straight(a.duration, a.v_target);
    else if (a.scenario == "step_steer")
        scenario = st::make_step_steer(a.duration, a.v_target, a.step_time, a.delta);
    else if (a.scenario == "steady_circle")
        scenario = st::make_steady_circle(a.duration, a.v_target, a.delta);
    else
        scenario = st::make_lap(a.v_target, a.delta, truth_params, a.dt_truth, cfg.v_min);

    const auto truth = st::simulate(scenario, truth_params, a.dt_truth, cfg.v_min);
    std::printf("scenario=%s\n", a.scenario.c_str());
    std::printf("duration_s=%.9g\n", scenario.duration);
    std::printf("rows_truth=%zu\n", truth.size());

    if (!a.out_truth.empty()) write_truth(a.out_truth, truth);

    const double dt_sensor = a.dt_sensor > 0.0 ? a.dt_sensor : cfg.dt;
    st::SensorNoise noise = cfg.sensor_noise;
    if (a.seed != 0) noise.seed = a.seed;
    if (!a.out_sensors.empty()) {
        const auto sensors = st::synthesize_sensors(truth, noise, dt_sensor);
        write_sensors(a.out_sensors, sensors);
        std::printf("rows_sensors=%zu\n", sensors.size());
    }

    st::MarkerExportOptions mopt;
    mopt.front_offset = a.marker_front > 0.0 ? a.marker_front : cfg.params.l_v;
    mopt.rear_offset = a.marker_rear > 0.0 ? a.marker_rear : cfg.params.l_h;
    mopt.sigma_marker = a.marker_sigma;
    mopt.seed = a.marker_seed;
    if (!a.out_markers.empty())
        write_markers(a.out_markers, st::export_markers(truth, dt_sensor, mopt));
    if (!a.out_circular.empty())
        write_circular(a.out_circular,
                       st::synthesize_circular_run(truth, noise, dt_sensor, mopt));
}

void run_estimate_cmd(const EstimateArgs& a) {
    const st::Config cfg = load_config_file(a.config_path);
    if (a.bench) {
        std::printf("mean_step_us=%.6g\n", st::benchmark_filter_us(cfg));
        if (a.input.empty()) return;
    }
    if (a.input.empty()) throw st::ParseError("estimate needs --input (or --bench)");

    st::RunOptions opt;
    opt.model = a.model == "kinematic" ? st::EstimatorModel::Kinematic
                                       : st::EstimatorModel::DynamicEkf;
    if (!a.reset_log.empty()) opt.pose_resets = read_pose_resets(a.reset_log);

    const auto sensors = read_sensors(a.input);
    const st::RunResult result = st::run_estimate(sensors, cfg, opt);
    if (!a.output.empty()) write_estimate(a.output, result.rows);
    std::printf("model=%s\n", a.model.c_str());
    std::printf("rows=%zu\n", result.rows.size());
    print_closure(result.closure);
}

void run_identify_cog(const CogArgs& a) {
    const auto [l_v, l_h] =
        st::cog_from_scale(st::AxleLoads{a.fgv, a.fgh}, a.wheelbase, a.mass, a.g);
    std::printf("l_v_m=%.9g\n", l_v);
    std::printf("l_h_m=%.9g\n", l_h);
    if (a.fleft >= 0.0 && a.fright >= 0.0 && a.track > 0.0) {
        // same lever-arm relation applied across the track width
        const auto [d_right, d_left] =
            st::cog_from_scale(st::AxleLoads{a.fleft, a.fright}, a.track, a.mass, a.g);
        std::printf("d_left_m=%.9g\n", d_left);
        std::printf("d_right_m=%.9g\n", d_right);
    }
}

void run_identify_inertia(const InertiaArgs& a) {
    const st::Config cfg = load_config_file(a.config_path);
    st::PendulumSetup setup;
    setup.D = a.cord_distance;
    setup.L = a.cord_length;
    setup.m = a.mass;
    setup.cycle_times = read_cycle_times(a.input);
    const double g = a.g > 0.0 ? a.g : cfg.g;
    const bool paper_constant = a.paper_constant || cfg.bifilar_paper_constant;
    std::printf("cycles=%zu\n", setup.cycle_times.size());
    std::printf("mean_period_s=%.9g\n", st::mean_period(setup.cycle_times));
    std::printf("J_kgm2=%.9g\n", st::inertia_bifilar(setup, g, paper_constant));
}

void run_identify_cornering(const CorneringArgs& a) {
    const st::Config cfg = load_config_file(a.config_path);
    const st::CircularRunData run = read_circular(a.input);
    if (run.markers.size() < static_cast<std::size_t>(cfg.smoothing_window) + 2)
        throw st::TooFewSamples("circular run shorter than the smoothing window");
    st::CorneringOptions opt;
    opt.smoothing_window = cfg.smoothing_window;
    opt.small_angle = !a.full_angle;
    const st::CorneringStiffnessFit fit =
        st::cornering_stiffness(run, cfg.params.m, cfg.params.l_v, cfg.params.l_h, opt);
    std::printf("C_v_Nprad=%.9g\n", fit.C_v);
    std::printf("C_h_Nprad=%.9g\n", fit.C_h);
    std::printf("slip_front_rad=%.9g\n", fit.slip_front);
    std::printf("slip_rear_rad=%.9g\n", fit.slip_rear);
    std::printf("beta_mean_rad=%.9g\n", fit.beta_mean);
    std::printf("psi_dot_mean_radps=%.9g\n", fit.psi_dot_mean);
    std::printf("v_mean_mps=%.9g\n", fit.v_mean);
    std::printf("a_y_mean_mps2=%.9g\n", fit.a_y_mean);
    std::printf("steady_window=[%zu,%zu)\n", fit.window_begin, fit.window_end);
}

void run_metrics_closure(const ClosureArgs& a) {
    print_closure(st::closure_metrics(read_poses(a.input)));
}

void run_metrics_horizon(const HorizonArgs& a) {
    if (!a.est.empty()) {
        // aligned-log comparison form
        if (a.truth.empty()) throw st::ParseError("horizon with --est also needs --truth");
        const st::HorizonStats s =
            st::horizon_error(read_poses(a.est), read_poses(a.truth), a.horizon);
        std::printf("horizon_steps=%d\n", s.horizon_steps);
        std::printf("mean_error_m=%.9g\n", s.mean_error);
        std::printf("max_error_m=%.9g\n", s.max_error);
        return;
    }
    if (a.truth.empty() || a.sensors.empty())
        throw st::ParseError("horizon needs --truth and --sensors (or --est/--truth)");
    const st::Config cfg = load_config_file(a.config_path);
    const auto truth = read_truth(a.truth);
    const auto truth_f = st::resample_truth(truth, cfg.dt);
    const auto sensors = read_sensors(a.sensors);
    const st::PredictionModel model = a.model == "kinematic" ? st::PredictionModel::Kinematic
                                                             : st::PredictionModel::Dynamic;
    const st::HorizonStats s =
        st::horizon_error_repredict(truth_f, sensors, a.horizon, cfg, model);
    std::printf("horizon_steps=%d\n", s.horizon_steps);
    std::printf("mean_error_m=%.9g\n", s.mean_error);
    std::printf("max_error_m=%.9g\n", s.max_error);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vehicle state prediction with single-track models and an EKF"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    EstimateArgs est_args;
    CogArgs cog_args;
    InertiaArgs in_args;
    CorneringArgs corn_args;
    ClosureArgs clo_args;
    HorizonArgs hor_args;

    CLI::App* sim = app.add_subcommand("simulate", "Generate ground truth and sensor logs");
    sim->add_option("--config", sim_args.config_path, "config JSON (defaults if omitted)");
    sim->add_option("--scenario", sim_args.scenario, "scenario kind")
        ->check(CLI::IsMember({"straight", "step_steer", "steady_circle", "lap"}));
    sim->add_option("--duration", sim_args.duration, "scenario duration [s] (not used by lap)");
    sim->add_option("--v-target", sim_args.v_target, "target speed [m/s]");
    sim->add_option("--delta", sim_args.delta, "steering angle [rad]");
    sim->add_option("--step-time", sim_args.step_time, "steering step time for step_steer [s]");
    sim->add_option("--dt-truth", sim_args.dt_truth, "truth integration step [s]");
    sim->add_option("--dt-sensor", sim_args.dt_sensor, "sensor grid [s] (default: config dt)");
    sim->add_option("--seed", sim_args.seed, "override sensor noise seed");
    sim->add_option("--mismatch", sim_args.mismatch,
                    "relative perturbation of C_v/C_h/J_z in the truth model");
    sim->add_option("--marker-sigma", sim_args.marker_sigma, "marker tracking noise [m]");
    sim->add_option("--marker-seed", sim_args.marker_seed, "marker noise seed");
    sim->add_option("--marker-front-offset", sim_args.marker_front,
                    "CoG to front marker [m] (default: l_v)");
    sim->add_option("--marker-rear-offset", sim_args.marker_rear,
                    "CoG to rear marker [m] (default: l_h)");
    sim->add_option("--output-truth", sim_args.out_truth, "truth CSV path");
    sim->add_option("--output-sensors", sim_args.out_sensors, "sensor CSV path");
    sim->add_option("--output-markers", sim_args.out_markers, "marker CSV path");
    sim->add_option("--output-circular", sim_args.out_circular, "circular-run CSV path");
    sim->callback([&] { run_simulate(sim_args); });

    CLI::App* est = app.add_subcommand("estimate", "Run the estimator over a sensor log");
    est->add_option("--config", est_args.config_path, "config JSON");
    est->add_option("--input", est_args.input, "sensor CSV");
    est->add_option("--output", est_args.output, "estimate CSV path");
    est->add_option("--model", est_args.model, "estimator model")
        ->check(CLI::IsMember({"dynamic-ekf", "kinematic"}));
    est->add_option("--pose-reset-log", est_args.reset_log,
                    "CSV of camera-style pose fixes (t_s,X_m,Y_m,psi_rad)");
    est->add_flag("--bench", est_args.bench, "measure mean predict+correct wall time");
    est->callback([&] { run_estimate_cmd(est_args); });

    CLI::App* ident = app.add_subcommand("identify", "Parameter identification");
    ident->require_subcommand(1);

    CLI::App* cog = ident->add_subcommand("cog", "Center of gravity from axle loads");
    cog->add_option("--fgv", cog_args.fgv, "force under front axle [N]")->required();
    cog->add_option("--fgh", cog_args.fgh, "force under rear axle [N]")->required();
    cog->add_option("--wheelbase", cog_args.wheelbase, "wheelbase [m]")->required();
    cog->add_option("--mass", cog_args.mass, "total mass [kg]")->required();
    cog->add_option("--g", cog_args.g, "gravity [m/s^2]");
    cog->add_option("--fleft", cog_args.fleft, "force under left side [N]");
    cog->add_option("--fright", cog_args.fright, "force under right side [N]");
    cog->add_option("--track", cog_args.track, "track width for the lateral CoG [m]");
    cog->callback([&] { run_identify_cog(cog_args); });

    CLI::App* inertia = ident->add_subcommand("inertia", "Yaw inertia from a bifilar pendulum");
    inertia->add_option("--config", in_args.config_path, "config JSON (g, bifilar constant)");
    inertia->add_option("--input", in_args.input, "cycle timestamps, one per line")->required();
    inertia->add_option("--cord-distance", in_args.cord_distance, "cord separation D [m]")
        ->required();
    inertia->add_option("--cord-length", in_args.cord_length, "cord length L [m]")->required();
    inertia->add_option("--mass", in_args.mass, "suspended mass [kg]")->required();
    inertia->add_option("--g", in_args.g, "gravity [m/s^2]");
    inertia->add_flag("--paper-constant", in_args.paper_constant,
                      "use the 16*pi*L denominator instead of 16*pi^2*L");
    inertia->callback([&] { run_identify_inertia(in_args); });

    CLI::App* corner =
        ident->add_subcommand("cornering", "Cornering stiffness from a circular run");
    corner->add_option("--config", corn_args.config_path, "config JSON");
    corner->add_option("--input", corn_args.input, "circular-run CSV")->required();
    corner->add_flag("--full-angle", corn_args.full_angle,
                     "keep the cos(delta - alpha_v) factor in the front force");
    corner->callback([&] { run_identify_cornering(corn_args); });

    CLI::App* metrics = app.add_subcommand("metrics", "Validation metrics");
    metrics->require_subcommand(1);

    CLI::App* closure = metrics->add_subcommand("closure", "Loop-closure deviation");
    closure->add_option("--input", clo_args.input, "pose CSV (estimate or truth)")->required();
    closure->callback([&] { run_metrics_closure(clo_args); });

    CLI::App* horizon = metrics->add_subcommand("horizon", "n-step open-loop prediction error");
    horizon->add_option("--config", hor_args.config_path, "config JSON");
    horizon->add_option("--truth", hor_args.truth, "truth CSV");
    horizon->add_option("--sensors", hor_args.sensors, "sensor CSV (inputs for re-prediction)");
    horizon->add_option("--est", hor_args.est, "pre-predicted pose CSV (aligned-log form)");
    horizon->add_option("--horizon", hor_args.horizon, "prediction steps");
    horizon->add_option("--model", hor_args.model, "re-prediction model")
        ->check(CLI::IsMember({"dynamic", "kinematic"}));
    horizon->callback([&] { run_metrics_horizon(hor_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    } catch (const st::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.kind() == st::ErrorKind::Input ? kExitInput : kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
