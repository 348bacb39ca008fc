#include "wheelins/observations.hpp"

#include <cmath>
#include <stdexcept>

namespace wheelins {

Mat3 GeometryConfig::mounting_dcm() const {
    return euler_to_dcm({0.0, mounting_pitch, mounting_yaw});
}

void GeometryConfig::validate() const {
    if (!(wheel_radius > 0.0)) {
        throw std::invalid_argument("geometry: wheel radius must be positive");
    }
    if (lever_b.norm() >= wheel_radius) {
        throw std::invalid_argument("geometry: lever arm must be shorter than the wheel radius");
    }
    if (std::abs(mounting_pitch) >= deg2rad(15.0) || std::abs(mounting_yaw) >= deg2rad(15.0)) {
        throw std::invalid_argument("geometry: mounting angles must stay below 15 deg");
    }
    if (speed_sign != 1.0 && speed_sign != -1.0) {
        throw std::invalid_argument("geometry: speed sign must be +1 or -1");
    }
}

ImuSample apply_mounting(const ImuSample& s, const GeometryConfig& geo) {
    if (geo.mounting_pitch == 0.0 && geo.mounting_yaw == 0.0) {
        return s;
    }
    const Mat3 c_bw = geo.mounting_dcm();
    ImuSample out;
    out.t = s.t;
    out.gyro = c_bw * s.gyro;
    out.accel = c_bw * s.accel;
    return out;
}

VelocityMeasurement wheel_speed(const std::vector<double>& gyro_x_window,
                                const GeometryConfig& geo, double forward_var,
                                double nhc_var) {
    if (gyro_x_window.empty()) {
        throw std::invalid_argument("wheel_speed: empty gyro window");
    }
    double mean = 0.0;
    for (double w : gyro_x_window) {
        mean += w;
    }
    mean /= static_cast<double>(gyro_x_window.size());

    VelocityMeasurement m;
    m.z = Vec3(geo.speed_sign * mean * geo.wheel_radius, 0.0, 0.0);
    m.R = Vec3(forward_var, nhc_var, nhc_var).asDiagonal();
    return m;
}

Mat3 vehicle_frame_dcm(const Quat& att_bn, double heading_offset) {
    const double psi_v = normalize_angle(heading_of(att_bn) - heading_offset);
    return euler_to_dcm({0.0, 0.0, psi_v}).transpose();
}

Vec3 predict_v_velocity(const NavState& nav, const Vec3& omega_b,
                        const GeometryConfig& geo, double heading_offset) {
    const Mat3 c_nv = vehicle_frame_dcm(nav.att, heading_offset);
    return c_nv * (nav.vel + nav.dcm() * omega_b.cross(geo.lever_b));
}

ObsMat build_H_velocity(const NavState& nav, const Vec3& omega_b,
                        const GeometryConfig& geo, DimMode mode,
                        double heading_offset, bool gyro_speed_coupling) {
    const StateLayout l = StateLayout::make(mode);
    const Mat3 c_bn = nav.dcm();
    const Mat3 c_nv = vehicle_frame_dcm(nav.att, heading_offset);
    const Vec3 lever_rate_n = c_bn * omega_b.cross(geo.lever_b);

    ObsMat H = ObsMat::Zero(3, l.dim);
    H.block<3, 3>(0, StateLayout::kVel) = c_nv;
    H.block<3, 3>(0, StateLayout::kPhi) = c_nv * skew(lever_rate_n);
    // heading error enters through the vehicle-frame projection (Eq.-1 coupling)
    H.col(StateLayout::kPhi + 2) -=
        c_nv * (skew(nav.vel) + skew(lever_rate_n)) * Vec3::UnitZ();

    if (l.has_bias) {
        const Mat3 lever_skew = skew(geo.lever_b);
        H.block<3, 3>(0, StateLayout::kBg) = -c_nv * c_bn * lever_skew;
        if (l.has_scale) {
            H.block<3, 3>(0, StateLayout::kSg) =
                -c_nv * c_bn * lever_skew * omega_b.asDiagonal();
        }
        if (gyro_speed_coupling) {
            const double r = geo.speed_sign * geo.wheel_radius;
            H(0, StateLayout::kBg) -= r;
            if (l.has_scale) {
                H(0, StateLayout::kSg) -= r * omega_b.x();
            }
        }
    }
    return H;
}

namespace {

Vec3 axis_std(const std::vector<ImuSample>& window, bool gyro) {
    Vec3 mean = Vec3::Zero();
    for (const auto& s : window) {
        mean += gyro ? s.gyro : s.accel;
    }
    mean /= static_cast<double>(window.size());
    Vec3 var = Vec3::Zero();
    for (const auto& s : window) {
        const Vec3 d = (gyro ? s.gyro : s.accel) - mean;
        var += d.cwiseProduct(d);
    }
    var /= static_cast<double>(window.size());
    return var.cwiseSqrt();
}

}  // namespace

bool detect_stationary(const std::vector<ImuSample>& window,
                       const StationaryThresholds& th, double window_speed) {
    if (window.empty()) {
        return false;
    }
    double gx_mean = 0.0;
    for (const auto& s : window) {
        gx_mean += s.gyro.x();
    }
    gx_mean /= static_cast<double>(window.size());

    return axis_std(window, true).maxCoeff() < th.gyro_std &&
           std::abs(gx_mean) < th.gyro_mean_x &&
           axis_std(window, false).maxCoeff() < th.accel_std &&
           std::abs(window_speed) < th.speed;
}

LinearMeasurement zupt_measurement(const NavState& nav, DimMode mode, double vel_var) {
    const StateLayout l = StateLayout::make(mode);
    LinearMeasurement m;
    m.z = nav.vel;
    m.H = Eigen::MatrixXd::Zero(3, l.dim);
    m.H.block<3, 3>(0, StateLayout::kVel) = Mat3::Identity();
    m.R = vel_var * Mat3::Identity();
    return m;
}

LinearMeasurement zihr_measurement(double heading_now, double heading_anchor,
                                   const Mat3& c_bn, DimMode mode, double var) {
    const StateLayout l = StateLayout::make(mode);
    LinearMeasurement m;
    m.z.resize(1);
    m.z(0) = normalize_angle(heading_now - heading_anchor);
    m.H = Eigen::MatrixXd::Zero(1, l.dim);
    const double denom = c_bn(0, 0) * c_bn(0, 0) + c_bn(1, 0) * c_bn(1, 0);
    m.H(0, StateLayout::kPhi + 0) = c_bn(0, 0) * c_bn(2, 0) / denom;
    m.H(0, StateLayout::kPhi + 1) = c_bn(1, 0) * c_bn(2, 0) / denom;
    m.H(0, StateLayout::kPhi + 2) = -1.0;
    m.R.resize(1, 1);
    m.R(0, 0) = var;
    return m;
}

}  // namespace wheelins
