#pragma once

#include <vector>

#include "wheelins/types.hpp"

namespace wheelins {

// Removes the modeled sensor errors: out = (in - b) / (1 + s) elementwise.
// Exact inverse of the corruption model m = (1 + s) * true + b.
ImuSample compensate(const ImuSample& in, const SensorErrors& err);

// One strapdown step from prev to curr (samples already compensated).
// Attitude by single-sample rotation vector, velocity by trapezoidal
// specific-force averaging projected with the mid-interval attitude,
// position by trapezoid on velocity. Gravity is +g on the NED down axis.
NavState propagate(const NavState& nav, const ImuSample& prev, const ImuSample& curr,
                   double gravity);

struct StaticAlignment {
    double roll{0.0};
    double pitch{0.0};
    Vec3 gyro_bias{Vec3::Zero()};
    Vec3 mean_accel{Vec3::Zero()};
};

// Accelerometer leveling + gyro-bias mean over a static window.
// roll = atan2(-fy, -fz), pitch = atan2(fx, sqrt(fy^2 + fz^2)).
// Throws if the window is empty or the mean specific force is not
// gravity-sized (grossly non-static data).
StaticAlignment static_align(const std::vector<ImuSample>& window, double gravity);

}  // namespace wheelins
