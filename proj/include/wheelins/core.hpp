#pragma once

#include <Eigen/Dense>

namespace wheelins {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDefaultGravity = 9.80665;  // m/s^2

constexpr double deg2rad(double d) { return d * kPi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

// common sensor-spec unit conversions
constexpr double dph_to_rps(double dph) { return deg2rad(dph) / 3600.0; }        // deg/h -> rad/s
constexpr double rps_to_dph(double rps) { return rad2deg(rps) * 3600.0; }
constexpr double dpsh_to_rpss(double d) { return deg2rad(d) / 60.0; }            // deg/sqrt(h) -> rad/sqrt(s)
constexpr double mpsh_to_mpss(double m) { return m / 60.0; }                     // m/s/sqrt(h) -> m/s/sqrt(s)
constexpr double ppm(double x) { return x * 1e-6; }

// Wraps an angle to (-pi, pi].
double normalize_angle(double a);

// Attitude as roll/pitch/yaw (rad). Frames are NED; yaw is the heading,
// measured clockwise from north. pitch must stay strictly inside (-pi/2, pi/2).
struct Euler {
    double roll{0.0};
    double pitch{0.0};
    double yaw{0.0};
};

Mat3 skew(const Vec3& v);

// C_b^n = Rz(yaw) * Ry(pitch) * Rx(roll). Rejects pitch at the +-pi/2 singularity.
Mat3 euler_to_dcm(const Euler& e);

// Inverse of euler_to_dcm. Rejects gimbal lock (|C(2,0)| too close to 1).
Euler dcm_to_euler(const Mat3& C);

// Rotation vector <-> SO(3)/quaternion. Small angles handled by series.
Mat3 exp_so3(const Vec3& rotvec);
Vec3 log_so3(const Mat3& C);
Quat quat_from_rotvec(const Vec3& rotvec);

// Heading of the body x-axis in the n-frame.
double heading_of(const Mat3& C);
inline double heading_of(const Quat& q) { return heading_of(q.toRotationMatrix()); }

bool is_rotation(const Mat3& C, double tol = 1e-9);

}  // namespace wheelins
