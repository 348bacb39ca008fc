#include "wheelins/filter.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

namespace wheelins {

double FilterConfig::effective_heading_offset() const {
    if (heading_offset) {
        return *heading_offset;
    }
    return mode == FilterMode::WheelIns ? kPi / 2.0 : 0.0;
}

void FilterConfig::validate() const {
    geometry.validate();
    if (!(gravity > 0.0)) {
        throw std::invalid_argument("config: gravity must be positive");
    }
    const double stds[] = {init_std.pos, init_std.vel, init_std.att, init_std.heading,
                           init_std.bg, init_std.ba, init_std.sg, init_std.sa,
                           forward_speed_std, nhc_std, zupt_std, zihr_std};
    for (double s : stds) {
        if (!(s > 0.0)) {
            throw std::invalid_argument("config: stds must be positive");
        }
    }
    if (!(meas_cadence_s > 0.0) || !(static_span_s > 0.0) ||
        !(stationary_window_s > 0.0) || !(out_decimation_s > 0.0)) {
        throw std::invalid_argument("config: intervals must be positive");
    }
    if (mode == FilterMode::OdoIns && odo_lever_b.norm() > 5.0) {
        throw std::invalid_argument("config: odo lever arm implausibly long");
    }
}

void predict_step(ErrorState& state, const StateMat& Phi, const StateMat& Qd) {
    state.dx = Phi * state.dx;
    state.P = Phi * state.P * Phi.transpose() + Qd;
    state.P = 0.5 * (state.P + state.P.transpose()).eval();
}

double chi2_gate_999(int dof) {
    switch (dof) {
        case 1: return 10.8276;
        case 2: return 13.8155;
        case 3: return 16.2662;
        default: throw std::invalid_argument("chi2_gate_999: dof must be 1..3");
    }
}

UpdateResult update_step(ErrorState& state, const LinearMeasurement& m, bool gate,
                         double gate_threshold) {
    UpdateResult res;
    const auto& H = m.H;
    const auto& R = m.R;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3> S =
        H * state.P * H.transpose() + R;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success ||
        ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
        res.skipped = true;
        return res;
    }
    const Eigen::VectorXd innov = m.z - H * state.dx;
    res.gamma = innov.dot(ldlt.solve(innov));
    if (gate && res.gamma > gate_threshold) {
        return res;  // rejected outlier, state untouched
    }

    const Eigen::MatrixXd K = ldlt.solve(H * state.P).transpose();
    state.dx += K * innov;
    const StateMat A =
        StateMat::Identity(state.layout.dim, state.layout.dim) - K * H;
    state.P = A * state.P * A.transpose() + K * R * K.transpose();
    state.P = 0.5 * (state.P + state.P.transpose()).eval();
    res.accepted = true;
    return res;
}

FeedbackResult feedback(NavState& nav, SensorErrors& errors, ErrorState& state) {
    const StateLayout& l = state.layout;
    FeedbackResult res;
    nav.pos -= state.dx.segment<3>(StateLayout::kPos);
    nav.vel -= state.dx.segment<3>(StateLayout::kVel);
    const Vec3 phi = state.dx.segment<3>(StateLayout::kPhi);
    res.divergence = phi.norm() > 0.5;
    nav.att = (quat_from_rotvec(phi) * nav.att).normalized();
    if (l.has_bias) {
        errors.bg += state.dx.segment<3>(StateLayout::kBg);
        errors.ba += state.dx.segment<3>(StateLayout::kBa);
    }
    if (l.has_scale) {
        errors.sg += state.dx.segment<3>(StateLayout::kSg);
        errors.sa += state.dx.segment<3>(StateLayout::kSa);
    }
    state.dx.setZero();
    return res;
}

namespace {

struct TruthPose {
    Vec3 pos;
    double yaw;
};

TruthPose interpolate_truth_pose(const TruthSeries& truth, double t) {
    if (truth.empty()) {
        throw std::runtime_error("init: truth series required for initial pose");
    }
    if (t < truth.front().t - 1e-9 || t > truth.back().t + 1e-9) {
        throw std::runtime_error("init: truth does not cover the alignment epoch");
    }
    auto it = std::lower_bound(truth.begin(), truth.end(), t,
                               [](const TruthSample& s, double tt) { return s.t < tt; });
    if (it == truth.begin()) {
        return {it->pos, it->att.yaw};
    }
    if (it == truth.end()) {
        return {truth.back().pos, truth.back().att.yaw};
    }
    const TruthSample& b = *it;
    const TruthSample& a = *(it - 1);
    const double w = (t - a.t) / (b.t - a.t);
    const double dyaw = normalize_angle(b.att.yaw - a.att.yaw);
    return {(1.0 - w) * a.pos + w * b.pos, normalize_angle(a.att.yaw + w * dyaw)};
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

InitResult init_filter(const RunInput& in, const FilterConfig& cfg) {
    cfg.validate();
    if (in.imu.size() < 2) {
        throw std::runtime_error("init: IMU stream too short");
    }
    const double t0 = in.imu.front().t;
    std::vector<ImuSample> window;
    for (const auto& raw : in.imu) {
        if (raw.t - t0 > cfg.static_span_s) {
            break;
        }
        window.push_back(cfg.mode == FilterMode::WheelIns ? apply_mounting(raw, cfg.geometry)
                                                          : raw);
    }
    if (window.size() < 2 || window.back().t - t0 < 0.9 * cfg.static_span_s) {
        throw std::runtime_error("init: static window shorter than the configured span");
    }

    double speed_est = 0.0;
    if (cfg.mode == FilterMode::WheelIns) {
        double gx = 0.0;
        for (const auto& s : window) {
            gx += s.gyro.x();
        }
        gx /= static_cast<double>(window.size());
        speed_est = cfg.geometry.speed_sign * gx * cfg.geometry.wheel_radius;
    } else {
        std::vector<double> speeds;
        for (const auto& o : in.odo) {
            if (o.t <= window.back().t) {
                speeds.push_back(o.speed);
            }
        }
        speed_est = mean_of(speeds);
    }
    if (!detect_stationary(window, cfg.stationary, speed_est)) {
        throw std::runtime_error("init: start window is not stationary");
    }

    const StaticAlignment align = static_align(window, cfg.gravity);
    const double t_init = window.back().t;
    const TruthPose pose = interpolate_truth_pose(in.truth, t_init);

    InitResult out;
    out.alignment = align;
    out.t_init = t_init;
    out.errors = SensorErrors{};
    if (cfg.estimate_initial_gyro_bias) {
        out.errors.bg = align.gyro_bias;
    }

    const double heading_b = normalize_angle(pose.yaw + cfg.effective_heading_offset());
    const Mat3 c_bn = euler_to_dcm({align.roll, align.pitch, heading_b});
    const Vec3 lever = cfg.mode == FilterMode::WheelIns ? cfg.geometry.lever_b
                                                        : cfg.odo_lever_b;
    out.nav.t = t_init;
    out.nav.att = Quat(c_bn).normalized();
    out.nav.pos = pose.pos - c_bn * lever;
    out.nav.vel = Vec3::Zero();

    out.state = ErrorState(cfg.dim_mode);
    auto set_block = [&](int idx, double std) {
        out.state.P.diagonal().segment<3>(idx).setConstant(std * std);
    };
    set_block(StateLayout::kPos, cfg.init_std.pos);
    set_block(StateLayout::kVel, cfg.init_std.vel);
    set_block(StateLayout::kPhi, cfg.init_std.att);
    out.state.P(StateLayout::kPhi + 2, StateLayout::kPhi + 2) =
        cfg.init_std.heading * cfg.init_std.heading;
    if (out.state.layout.has_bias) {
        set_block(StateLayout::kBg, cfg.init_std.bg);
        set_block(StateLayout::kBa, cfg.init_std.ba);
    }
    if (out.state.layout.has_scale) {
        set_block(StateLayout::kSg, cfg.init_std.sg);
        set_block(StateLayout::kSa, cfg.init_std.sa);
    }
    return out;
}

FilterOutput run_filter(const RunInput& in, const FilterConfig& cfg) {
    InitResult ir = init_filter(in, cfg);
    NavState nav = ir.nav;
    ErrorState state = std::move(ir.state);
    SensorErrors errors = ir.errors;

    // stream validation against the nominal period
    std::vector<double> dts;
    for (std::size_t k = 1; k < std::min<std::size_t>(in.imu.size(), 1000); ++k) {
        dts.push_back(in.imu[k].t - in.imu[k - 1].t);
    }
    std::sort(dts.begin(), dts.end());
    const double nominal_dt = dts[dts.size() / 2];
    if (cfg.meas_cadence_s < nominal_dt) {
        throw std::invalid_argument("config: measurement cadence below the IMU period");
    }

    const double offset = cfg.effective_heading_offset();
    const bool wheel = cfg.mode == FilterMode::WheelIns;
    GeometryConfig geo_eff = cfg.geometry;
    if (!wheel) {
        geo_eff.lever_b = cfg.odo_lever_b;
        geo_eff.mounting_pitch = 0.0;
        geo_eff.mounting_yaw = 0.0;
    }
    const NoiseMat Q = noise_psd_matrix(cfg.noise, cfg.dim_mode);
    const double fwd_var = cfg.forward_speed_std * cfg.forward_speed_std;
    const double nhc_var = cfg.nhc_std * cfg.nhc_std;

    FilterOutput out;

    // measurement-window accumulators
    std::deque<ImuSample> stat_window;
    double gyro_x_sum = 0.0;
    Vec3 pred_sum = Vec3::Zero();
    std::size_t win_count = 0;
    double last_meas_t = ir.t_init;
    double last_out_t = ir.t_init - cfg.out_decimation_s;
    std::size_t odo_idx = 0;
    bool was_stationary = false;
    double stationary_since = 0.0;
    bool have_anchor = false;
    double anchor_heading = 0.0;

    // first processed pair starts at the last alignment sample
    std::size_t i0 = 0;
    while (i0 < in.imu.size() && in.imu[i0].t < ir.t_init - 1e-12) {
        ++i0;
    }
    ImuSample prev = compensate(
        wheel ? apply_mounting(in.imu[i0], cfg.geometry) : in.imu[i0], errors);

    auto log_record = [&](double t, const Vec3& gyro) {
        OutputRecord rec;
        rec.t = t;
        const Mat3 c = nav.dcm();
        rec.pos = nav.pos + c * geo_eff.lever_b;
        rec.vel = nav.vel + c * gyro.cross(geo_eff.lever_b);
        rec.att = nav.euler();
        rec.psi_v = normalize_angle(heading_of(c) - offset);
        rec.p_diag = state.P.diagonal();
        rec.errors = errors;
        out.records.push_back(std::move(rec));
    };
    log_record(ir.t_init, prev.gyro);
    last_out_t = ir.t_init;

    int steps = 0;
    for (std::size_t k = i0 + 1; k < in.imu.size(); ++k) {
        const double dt = in.imu[k].t - in.imu[k - 1].t;
        if (!(dt > 0.0)) {
            throw std::runtime_error("imu stream: non-increasing timestamp at record " +
                                     std::to_string(k));
        }
        if (dt > cfg.max_gap_factor * nominal_dt) {
            throw std::runtime_error("imu stream: gap at record " + std::to_string(k) +
                                     " (t=" + std::to_string(in.imu[k].t) + ")");
        }
        const ImuSample curr = compensate(
            wheel ? apply_mounting(in.imu[k], cfg.geometry) : in.imu[k], errors);

        const Mat3 c_prev = nav.dcm();
        nav = propagate(nav, prev, curr, cfg.gravity);

        const StateMat F = build_F(c_prev, curr.accel, curr.gyro, cfg.noise.gm,
                                   cfg.dim_mode);
        const StateNoiseMat G = build_G(c_prev, cfg.dim_mode);
        auto [Phi, Qd] = discretize(F, G, Q, dt);
        predict_step(state, Phi, Qd);

        stat_window.push_back(curr);
        while (!stat_window.empty() &&
               curr.t - stat_window.front().t > cfg.stationary_window_s + 1e-9) {
            stat_window.pop_front();
        }
        gyro_x_sum += curr.gyro.x();
        pred_sum += predict_v_velocity(nav, curr.gyro, geo_eff, offset);
        ++win_count;

        if (curr.t - last_meas_t >= cfg.meas_cadence_s - 1e-9 && win_count > 0) {
            const double gyro_x_mean = gyro_x_sum / static_cast<double>(win_count);
            double speed_est = 0.0;
            bool have_speed = true;
            if (wheel) {
                speed_est = geo_eff.speed_sign * gyro_x_mean * geo_eff.wheel_radius;
            } else {
                std::vector<double> speeds;
                while (odo_idx < in.odo.size() && in.odo[odo_idx].t <= curr.t + 1e-9) {
                    if (in.odo[odo_idx].t > last_meas_t) {
                        speeds.push_back(in.odo[odo_idx].speed);
                    }
                    ++odo_idx;
                }
                if (speeds.empty()) {
                    have_speed = false;
                } else {
                    speed_est = mean_of(speeds);
                }
            }

            const std::vector<ImuSample> window_vec(stat_window.begin(), stat_window.end());
            const bool stationary =
                detect_stationary(window_vec, cfg.stationary, speed_est);

            if (stationary && cfg.zupt_enable) {
                if (!was_stationary) {
                    stationary_since = curr.t;
                    have_anchor = false;
                }
                LinearMeasurement zm =
                    zupt_measurement(nav, cfg.dim_mode, cfg.zupt_std * cfg.zupt_std);
                UpdateResult ur = update_step(state, zm, cfg.gate_enable, chi2_gate_999(3));
                out.updates.push_back({curr.t, UpdateEvent::Type::Zupt, 3, ur.gamma,
                                       ur.accepted});
                if (ur.skipped) {
                    ++out.skipped_updates;
                }
                if (ur.accepted) {
                    if (feedback(nav, errors, state).divergence) {
                        out.divergence_times.push_back(curr.t);
                    }
                }
                if (cfg.zihr_enable) {
                    const double heading_now = heading_of(nav.att);
                    if (have_anchor && curr.t - stationary_since >= cfg.zihr_engage_s) {
                        LinearMeasurement im = zihr_measurement(
                            heading_now, anchor_heading, nav.dcm(), cfg.dim_mode,
                            cfg.zihr_std * cfg.zihr_std);
                        UpdateResult ur2 =
                            update_step(state, im, cfg.gate_enable, chi2_gate_999(1));
                        out.updates.push_back({curr.t, UpdateEvent::Type::Zihr, 1,
                                               ur2.gamma, ur2.accepted});
                        if (ur2.skipped) {
                            ++out.skipped_updates;
                        }
                        if (ur2.accepted) {
                            if (feedback(nav, errors, state).divergence) {
                                out.divergence_times.push_back(curr.t);
                            }
                        }
                    }
                    anchor_heading = heading_of(nav.att);
                    have_anchor = true;
                }
                was_stationary = true;
            } else if (have_speed) {
                VelocityMeasurement meas;
                meas.z = Vec3(speed_est, 0.0, 0.0);
                meas.R = Vec3(fwd_var, nhc_var, nhc_var).asDiagonal();
                LinearMeasurement lm;
                lm.z = pred_sum / static_cast<double>(win_count) - meas.z;
                lm.H = build_H_velocity(nav, curr.gyro, geo_eff, cfg.dim_mode, offset,
                                        wheel && cfg.gyro_speed_coupling);
                lm.R = meas.R;
                UpdateResult ur = update_step(state, lm, cfg.gate_enable, chi2_gate_999(3));
                out.updates.push_back({curr.t,
                                       wheel ? UpdateEvent::Type::WheelSpeed
                                             : UpdateEvent::Type::OdoSpeed,
                                       3, ur.gamma, ur.accepted});
                if (ur.skipped) {
                    ++out.skipped_updates;
                }
                if (ur.accepted) {
                    if (feedback(nav, errors, state).divergence) {
                        out.divergence_times.push_back(curr.t);
                    }
                }
                was_stationary = false;
                have_anchor = false;
            }
            gyro_x_sum = 0.0;
            pred_sum.setZero();
            win_count = 0;
            last_meas_t = curr.t;
        }

        if (cfg.cov_check_interval > 0 && ++steps % cfg.cov_check_interval == 0) {
            const double asym = (state.P - state.P.transpose()).cwiseAbs().maxCoeff();
            out.max_asymmetry = std::max(out.max_asymmetry, asym);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(state.P,
                                                              Eigen::EigenvaluesOnly);
            const double ratio = es.eigenvalues().minCoeff() / state.P.trace();
            out.min_eigen_trace_ratio = std::min(out.min_eigen_trace_ratio, ratio);
        }

        if (curr.t - last_out_t >= cfg.out_decimation_s - 1e-9) {
            log_record(curr.t, curr.gyro);
            last_out_t = curr.t;
        }
        prev = curr;
    }
    return out;
}

}  // namespace wheelins
