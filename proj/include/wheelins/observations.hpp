#pragma once

#include <vector>

#include "wheelins/errormodel.hpp"
#include "wheelins/types.hpp"

namespace wheelins {

// Installation geometry of the wheel-mounted IMU. lever_b points from the
// IMU measurement center to the wheel rotation center, in the sensor frame.
// speed_sign fixes the sign convention between forward motion and the
// x-gyro reading (+1 matches the simulator's convention).
struct GeometryConfig {
    double wheel_radius{0.3};      // m
    Vec3 lever_b{Vec3::Zero()};    // m
    double mounting_pitch{0.0};    // rad
    double mounting_yaw{0.0};      // rad
    double speed_sign{1.0};

    // Fixed correction DCM b->w built from (0, mounting_pitch, mounting_yaw).
    Mat3 mounting_dcm() const;
    void validate() const;  // throws on violated invariants
};

struct VelocityMeasurement {
    Vec3 z{Vec3::Zero()};      // v-frame: (forward speed, 0, 0)
    Mat3 R{Mat3::Zero()};
};

// Rotates gyro/accel into the wheel frame with the pre-calibrated mounting
// angles (roll mounting angle has no effect and is not modeled).
ImuSample apply_mounting(const ImuSample& s, const GeometryConfig& geo);

// Gyro-derived forward speed with non-holonomic constraints:
// z = (speed_sign * mean(gyro_x) * r, 0, 0), R = diag(forward_var, nhc_var, nhc_var).
VelocityMeasurement wheel_speed(const std::vector<double>& gyro_x_window,
                                const GeometryConfig& geo, double forward_var,
                                double nhc_var);

// True n->v rotation of the vehicle frame under the horizontal-motion
// assumption: vehicle heading = IMU heading - heading_offset, roll = pitch = 0.
// heading_offset is pi/2 for the wheel-mounted IMU, 0 for a body IMU.
Mat3 vehicle_frame_dcm(const Quat& att_bn, double heading_offset);

// INS-indicated v-frame velocity at the wheel center:
// C_n^v * (v^n + C_b^n * (omega_b x lever_b)).
Vec3 predict_v_velocity(const NavState& nav, const Vec3& omega_b,
                        const GeometryConfig& geo, double heading_offset);

using ObsMat = Eigen::Matrix<double, 3, Eigen::Dynamic, 0, 3, 21>;

// Jacobian of the v-frame velocity innovation w.r.t. the error state.
// gyro_speed_coupling additionally models the r*domega_x dependence of the
// measured speed on the gyro errors (off by default, matching the paper).
ObsMat build_H_velocity(const NavState& nav, const Vec3& omega_b,
                        const GeometryConfig& geo, DimMode mode,
                        double heading_offset, bool gyro_speed_coupling = false);

struct StationaryThresholds {
    double gyro_std{deg2rad(0.2)};       // rad/s, per-axis sample std
    double gyro_mean_x{deg2rad(0.5)};    // rad/s, |mean| of the spin axis
    double accel_std{1.0};               // m/s^2, per-axis sample std
    double speed{0.05};                  // m/s, |window speed estimate|
};

// Window test: per-axis stds below thresholds, spin-axis mean below
// threshold, and the supplied speed estimate (gyro- or odometer-derived)
// near zero. The speed gate is what separates "parked" from "cruising in a
// straight line" on a body-mounted IMU.
bool detect_stationary(const std::vector<ImuSample>& window,
                       const StationaryThresholds& th, double window_speed);

// Generic linear measurement for the EKF update.
struct LinearMeasurement {
    Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1> z;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 21> H;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3> R;
};

// Zero-velocity update: z = v_hat, H = [0 | I | 0 ...].
LinearMeasurement zupt_measurement(const NavState& nav, DimMode mode, double vel_var);

// Zero-integrated-heading-rate update: z = heading(now) - heading(anchor),
// H is the heading-error row of the attitude block.
LinearMeasurement zihr_measurement(double heading_now, double heading_anchor,
                                   const Mat3& c_bn, DimMode mode, double var);

}  // namespace wheelins
