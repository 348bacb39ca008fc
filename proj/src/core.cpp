#include "wheelins/core.hpp"

#include <cmath>
#include <stdexcept>

namespace wheelins {

double normalize_angle(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a <= 0.0) {
        a += 2.0 * kPi;
    }
    return a - kPi;
}

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
        -v.y(), v.x(), 0.0;
    return m;
}

Mat3 euler_to_dcm(const Euler& e) {
    if (std::abs(e.pitch) >= kPi / 2.0 - 1e-9) {
        throw std::invalid_argument("euler_to_dcm: pitch at +-90 deg singularity");
    }
    const double cr = std::cos(e.roll), sr = std::sin(e.roll);
    const double cp = std::cos(e.pitch), sp = std::sin(e.pitch);
    const double cy = std::cos(e.yaw), sy = std::sin(e.yaw);
    Mat3 C;
    C << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
         sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
         -sp, cp * sr, cp * cr;
    return C;
}

Euler dcm_to_euler(const Mat3& C) {
    if (std::abs(C(2, 0)) >= 1.0 - 1e-9) {
        throw std::invalid_argument("dcm_to_euler: gimbal lock");
    }
    Euler e;
    e.pitch = std::asin(-C(2, 0));
    e.roll = std::atan2(C(2, 1), C(2, 2));
    e.yaw = std::atan2(C(1, 0), C(0, 0));
    return e;
}

Mat3 exp_so3(const Vec3& rotvec) {
    const double theta = rotvec.norm();
    const Mat3 K = skew(rotvec);
    if (theta < 1e-10) {
        return Mat3::Identity() + K + 0.5 * K * K;
    }
    const double a = std::sin(theta) / theta;
    const double b = (1.0 - std::cos(theta)) / (theta * theta);
    return Mat3::Identity() + a * K + b * K * K;
}

Vec3 log_so3(const Mat3& C) {
    const double tr = C.trace();
    const double cos_theta = std::min(1.0, std::max(-1.0, (tr - 1.0) / 2.0));
    const double theta = std::acos(cos_theta);
    Vec3 v(C(2, 1) - C(1, 2), C(0, 2) - C(2, 0), C(1, 0) - C(0, 1));
    if (theta < 1e-7) {
        return 0.5 * v;  // sin(theta) ~= theta
    }
    if (theta > kPi - 1e-5) {
        // near pi the antisymmetric part vanishes; recover the axis from the diagonal
        Vec3 axis;
        int i = 0;
        C.diagonal().maxCoeff(&i);
        axis[i] = std::sqrt(std::max(0.0, (C(i, i) + 1.0) / 2.0));
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        axis[j] = (C(i, j) + C(j, i)) / (4.0 * axis[i]);
        axis[k] = (C(i, k) + C(k, i)) / (4.0 * axis[i]);
        if (v.dot(axis) < 0.0) {
            axis = -axis;
        }
        return theta * axis.normalized();
    }
    return (theta / (2.0 * std::sin(theta))) * v;
}

Quat quat_from_rotvec(const Vec3& rotvec) {
    const double theta = rotvec.norm();
    double w, s;
    if (theta < 1e-10) {
        const double t2 = theta * theta;
        w = 1.0 - t2 / 8.0;
        s = 0.5 - t2 / 48.0;
    } else {
        w = std::cos(theta / 2.0);
        s = std::sin(theta / 2.0) / theta;
    }
    return Quat(w, s * rotvec.x(), s * rotvec.y(), s * rotvec.z());
}

double heading_of(const Mat3& C) {
    return std::atan2(C(1, 0), C(0, 0));
}

bool is_rotation(const Mat3& C, double tol) {
    const Mat3 err = C.transpose() * C - Mat3::Identity();
    return err.cwiseAbs().maxCoeff() <= tol && std::abs(C.determinant() - 1.0) <= tol;
}

}  // namespace wheelins
