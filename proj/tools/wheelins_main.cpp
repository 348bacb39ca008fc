#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wheelins/io.hpp"

namespace fs = std::filesystem;
using namespace wheelins;

namespace {

TrackSpec resolve_track(const std::string& name) {
    for (const auto& p : track_preset_names()) {
        if (p == name) {
            return track_preset(name);
        }
    }
    if (fs::exists(name)) {
        return load_track_spec(name);
    }
    throw IoError("unknown track preset or missing file: " + name);
}

ErrorSpec resolve_grade(const std::string& name) {
    for (const auto& p : imu_grade_preset_names()) {
        if (p == name) {
            return imu_grade_preset(name);
        }
    }
    if (fs::exists(name)) {
        return load_imu_grade(name);
    }
    throw IoError("unknown imu grade preset or missing file: " + name);
}

void cmd_simulate(const std::string& track, const std::string& grade,
                  std::uint64_t seed, const std::string& out_dir,
                  const std::string& geometry_file) {
    SimOptions opt;
    opt.track = resolve_track(track);
    opt.err = resolve_grade(grade);
    opt.err.seed = seed;
    if (!geometry_file.empty()) {
        const SimGeometry g = load_sim_geometry(geometry_file);
        opt.geometry = g.geometry;
        opt.body_lever = g.body_lever;
        opt.odo_rate_hz = g.odo_rate_hz;
        opt.odo_rmse = g.odo_rmse;
    }
    const SimDataset ds = simulate_dataset(opt);

    std::vector<std::pair<std::string, std::string>> extra;
    extra.emplace_back("geometry.wheel_radius", format_double(opt.geometry.wheel_radius));
    extra.emplace_back("geometry.lever_arm",
                       format_double(opt.geometry.lever_b.x()) + ", " +
                           format_double(opt.geometry.lever_b.y()) + ", " +
                           format_double(opt.geometry.lever_b.z()));
    extra.emplace_back("geometry.mounting_pitch_deg",
                       format_double(rad2deg(opt.geometry.mounting_pitch)));
    extra.emplace_back("geometry.mounting_yaw_deg",
                       format_double(rad2deg(opt.geometry.mounting_yaw)));
    extra.emplace_back("geometry.speed_sign", format_double(opt.geometry.speed_sign));
    extra.emplace_back("odo.lever_arm", format_double(opt.body_lever.x()) + ", " +
                                            format_double(opt.body_lever.y()) + ", " +
                                            format_double(opt.body_lever.z()));
    extra.emplace_back("sim.track", track);
    extra.emplace_back("sim.imu_grade", grade);
    extra.emplace_back("sim.seed", std::to_string(seed));
    write_dataset(out_dir, ds, extra);
    std::cout << "dataset written to " << out_dir << " (" << ds.wheel_imu.size()
              << " imu samples)\n";
}

void cmd_run(const std::string& dataset_dir, const std::string& config_file,
             const std::string& mode, int state_dim, const std::string& out_dir,
             bool no_initial_bias, int cov_check) {
    FilterConfig cfg = load_config(config_file);
    if (mode == "wheel-ins") {
        cfg.mode = FilterMode::WheelIns;
    } else if (mode == "odo-ins") {
        cfg.mode = FilterMode::OdoIns;
    } else if (!mode.empty()) {
        throw IoError("run: --mode must be wheel-ins or odo-ins");
    }
    if (state_dim != 0) {
        cfg.dim_mode = dim_mode_from_int(state_dim);
    }
    if (no_initial_bias) {
        cfg.estimate_initial_gyro_bias = false;
    }
    if (cov_check > 0) {
        cfg.cov_check_interval = cov_check;
    }

    const LoadedDataset ds = load_dataset(dataset_dir);
    RunInput in;
    in.truth = ds.truth;
    if (cfg.mode == FilterMode::WheelIns) {
        if (!ds.has_wheel) {
            throw IoError("run: dataset has no wheel-IMU stream");
        }
        in.imu = ds.wheel_imu;
    } else {
        if (!ds.has_body || !ds.has_odo) {
            throw IoError("run: odo-ins needs body-IMU and odometer streams");
        }
        in.imu = ds.body_imu;
        in.odo = ds.odometer;
    }

    const FilterOutput out = run_filter(in, cfg);
    fs::create_directories(out_dir);
    save_nav(out_dir + "/nav.csv", out);
    save_cov_diag(out_dir + "/cov.csv", out);
    save_sensor_errors(out_dir + "/sensors.csv", out);
    save_update_log(out_dir + "/updates.log", out);

    std::vector<std::pair<std::string, std::string>> rep;
    rep.emplace_back("run.records", std::to_string(out.records.size()));
    rep.emplace_back("run.updates", std::to_string(out.updates.size()));
    rep.emplace_back("run.skipped_updates", std::to_string(out.skipped_updates));
    rep.emplace_back("run.divergence_flags", std::to_string(out.divergence_times.size()));
    if (cfg.cov_check_interval > 0) {
        rep.emplace_back("run.min_eigen_trace_ratio",
                         format_double(out.min_eigen_trace_ratio));
        rep.emplace_back("run.max_asymmetry", format_double(out.max_asymmetry));
    }
    write_report(out_dir + "/run_report.txt", rep);
    std::cout << "run complete: " << out.records.size() << " records, "
              << out.updates.size() << " updates\n";
}

void cmd_eval(const std::string& est_file, const std::string& truth_file,
              double segment_length, const std::string& report_file,
              const std::string& errors_csv, bool per_window) {
    const std::vector<PoseRecord> est = load_nav(est_file);
    const std::vector<PoseRecord> truth = to_pose_records(load_truth(truth_file));
    const AlignedPair pair = align(est, truth);
    const DriftResult drift = segmented_drift(pair, segment_length, per_window);
    const HeadingStats hs = heading_stats(pair);
    const double vrms = velocity_rms(pair);

    std::vector<std::pair<std::string, std::string>> rep;
    rep.emplace_back("drift.mean_pct", format_double(drift.mean_pct));
    rep.emplace_back("drift.std_pct", format_double(drift.std_pct));
    rep.emplace_back("drift.segments", std::to_string(drift.rates_pct.size()));
    rep.emplace_back("heading.rmse_deg", format_double(hs.rmse_deg));
    rep.emplace_back("heading.max_deg", format_double(hs.max_deg));
    rep.emplace_back("velocity.rms_mps", format_double(vrms));
    rep.emplace_back("distance.total_m", format_double(pair.total_distance));
    rep.emplace_back("samples.aligned", std::to_string(pair.items.size()));
    for (std::size_t k = 0; k < drift.rates_pct.size(); ++k) {
        rep.emplace_back("drift.rate_" + std::to_string(k + 1) + "_pct",
                         format_double(drift.rates_pct[k]));
    }
    write_report(report_file, rep);

    if (!errors_csv.empty()) {
        std::ofstream out(errors_csv);
        if (!out) {
            throw IoError("cannot write file: " + errors_csv);
        }
        for (const auto& it : pair.items) {
            out << format_double(it.t) << ',' << format_double(it.distance) << ','
                << format_double(it.horiz_err) << ','
                << format_double(rad2deg(it.heading_err)) << '\n';
        }
    }
    std::cout << "drift mean " << drift.mean_pct << " % (std " << drift.std_pct
              << " %), heading rmse " << hs.rmse_deg << " deg\n";
}

void cmd_modulate(const std::string& bias_arg, double wheel_rate, double duration,
                  const std::string& out_file) {
    const std::vector<double> parts = [&] {
        std::vector<double> v;
        std::stringstream ss(bias_arg);
        std::string item;
        while (std::getline(ss, item, ',')) {
            v.push_back(std::stod(item));
        }
        return v;
    }();
    if (parts.size() != 3) {
        throw IoError("modulate: --bias needs gx,gy,gz in deg/h");
    }
    const Vec3 eps(dph_to_rps(parts[0]), dph_to_rps(parts[1]), dph_to_rps(parts[2]));
    std::ofstream out(out_file);
    if (!out) {
        throw IoError("cannot write file: " + out_file);
    }
    const double dt = 0.01;
    for (double t = 0.0; t <= duration + 1e-9; t += dt) {
        const Vec3 e = modulation_error(eps, wheel_rate, t);
        out << format_double(t) << ',' << format_double(rad2deg(e.x())) << ','
            << format_double(rad2deg(e.y())) << ',' << format_double(rad2deg(e.z()))
            << '\n';
    }
    std::cout << "modulation curve written to " << out_file << "\n";
}

void cmd_inject_bias(const std::string& dataset_dir, double bias_dph,
                     const std::string& out_dir) {
    const LoadedDataset ds = load_dataset(dataset_dir);
    fs::create_directories(out_dir);
    const Vec3 bias = Vec3::Constant(dph_to_rps(bias_dph));

    auto inject = [&](std::vector<ImuSample> stream) {
        for (auto& s : stream) {
            s.gyro += bias;
        }
        return stream;
    };
    if (ds.has_wheel) {
        save_imu(out_dir + "/wheel_imu.csv", inject(ds.wheel_imu));
    }
    if (ds.has_body) {
        save_imu(out_dir + "/body_imu.csv", inject(ds.body_imu));
    }
    if (ds.has_odo) {
        save_odo(out_dir + "/odometer.csv", ds.odometer);
    }
    save_truth(out_dir + "/truth.csv", ds.truth);

    KeyValues kv = ds.manifest;
    kv.set_double("inject.gyro_bias_dph", bias_dph);
    std::ofstream out(out_dir + "/manifest.txt");
    if (!out) {
        throw IoError("cannot write manifest: " + out_dir);
    }
    out << kv.serialize();
    std::cout << "biased dataset written to " << out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wheel-mounted IMU dead reckoning toolkit"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
    std::string track = "loop-small", grade = "icm20602", out_dir = "dataset";
    std::string geometry_file;
    std::uint64_t seed = 0;
    sim->add_option("--track", track, "track preset name or spec file");
    sim->add_option("--imu-grade", grade, "imu grade preset name or spec file");
    sim->add_option("--seed", seed, "rng seed");
    sim->add_option("--out", out_dir, "output directory")->required();
    sim->add_option("--geometry", geometry_file, "geometry spec file");
    sim->callback([&] { cmd_simulate(track, grade, seed, out_dir, geometry_file); });

    // run
    auto* run = app.add_subcommand("run", "run the dead-reckoning filter");
    std::string dataset_dir, config_file, mode, run_out = "run_out";
    int state_dim = 0, cov_check = 0;
    bool no_initial_bias = false;
    run->add_option("--dataset", dataset_dir, "dataset directory")->required();
    run->add_option("--config", config_file, "filter configuration file")->required();
    run->add_option("--mode", mode, "wheel-ins or odo-ins (overrides config)");
    run->add_option("--state-dim", state_dim, "21, 15 or 9 (overrides config)");
    run->add_option("--out", run_out, "output directory")->required();
    run->add_flag("--no-initial-bias", no_initial_bias,
                  "skip static gyro-bias initialization");
    run->add_option("--cov-check", cov_check, "covariance PSD check interval (samples)");
    run->callback([&] {
        cmd_run(dataset_dir, config_file, mode, state_dim, run_out, no_initial_bias,
                cov_check);
    });

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate an estimate against truth");
    std::string est_file, truth_file, report_file = "report.txt", errors_csv;
    double segment_length = 100.0;
    bool per_window = false;
    ev->add_option("--est", est_file, "estimated nav.csv")->required();
    ev->add_option("--truth", truth_file, "truth csv")->required();
    ev->add_option("--segment-length", segment_length, "segment length in meters");
    ev->add_option("--report", report_file, "report output file")->required();
    ev->add_option("--errors-csv", errors_csv, "optional per-sample error csv");
    ev->add_flag("--per-window", per_window, "disjoint windows instead of prefixes");
    ev->callback([&] {
        cmd_eval(est_file, truth_file, segment_length, report_file, errors_csv, per_window);
    });

    // modulate
    auto* mod = app.add_subcommand("modulate", "closed-form rotation-modulation curves");
    std::string bias_arg = "0,0,0", mod_out = "modulation.csv";
    double wheel_rate = 4.633, duration = 10.0;
    mod->add_option("--bias", bias_arg, "gyro bias gx,gy,gz in deg/h")->required();
    mod->add_option("--wheel-rate", wheel_rate, "wheel rate in rad/s")->required();
    mod->add_option("--duration", duration, "duration in seconds")->required();
    mod->add_option("--out", mod_out, "output csv")->required();
    mod->callback([&] { cmd_modulate(bias_arg, wheel_rate, duration, mod_out); });

    // inject-bias
    auto* inj = app.add_subcommand("inject-bias", "add a constant gyro bias to a dataset");
    std::string inj_dataset, inj_out;
    double bias_dph = 0.0;
    inj->add_option("--dataset", inj_dataset, "input dataset directory")->required();
    inj->add_option("--gyro-bias-deg-h", bias_dph, "bias in deg/h, all axes")->required();
    inj->add_option("--out", inj_out, "output dataset directory")->required();
    inj->callback([&] { cmd_inject_bias(inj_dataset, bias_dph, inj_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << std::endl;
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: data: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: data: " << e.what() << std::endl;
        return 2;
    }
    return 0;
}
