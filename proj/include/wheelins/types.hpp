#pragma once

#include <vector>

#include "wheelins/core.hpp"

namespace wheelins {

// One IMU record: angular rate (rad/s) and specific force (m/s^2) in the
// sensor body frame, timestamp in seconds. Streams must be strictly
// time-increasing.
struct ImuSample {
    double t{0.0};
    Vec3 gyro{Vec3::Zero()};
    Vec3 accel{Vec3::Zero()};
};

// Position/velocity/attitude of the IMU in the local NED navigation frame.
// Attitude is kept as a unit quaternion b->n; DCM and Euler are views.
struct NavState {
    double t{0.0};
    Vec3 pos{Vec3::Zero()};   // m, NED from start
    Vec3 vel{Vec3::Zero()};   // m/s, n-frame
    Quat att{Quat::Identity()};

    Mat3 dcm() const { return att.toRotationMatrix(); }
    Euler euler() const { return dcm_to_euler(dcm()); }
};

// Accumulated estimates of the residual sensor errors, fed back into IMU
// compensation. Scale factors are dimensionless (ppm scale).
struct SensorErrors {
    Vec3 bg{Vec3::Zero()};  // rad/s
    Vec3 ba{Vec3::Zero()};  // m/s^2
    Vec3 sg{Vec3::Zero()};
    Vec3 sa{Vec3::Zero()};
};

// Ground-truth vehicle pose record (wheel-center point, NED + attitude).
struct TruthSample {
    double t{0.0};
    Vec3 pos{Vec3::Zero()};
    Euler att{};
};
using TruthSeries = std::vector<TruthSample>;

struct OdoSample {
    double t{0.0};
    double speed{0.0};  // m/s, along-track
};

}  // namespace wheelins
