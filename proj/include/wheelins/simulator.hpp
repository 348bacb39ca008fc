#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wheelins/observations.hpp"
#include "wheelins/types.hpp"

namespace wheelins {

// Track description: ordered segments, sampled at rate_hz. Grades are
// per-segment targets reached with a linear blend over grade_blend_m so the
// truth stays C1 away from stop boundaries.
struct Segment {
    enum class Type { Straight, Arc, Stop, Ramp };
    Type type{Type::Straight};
    // Straight: length, speed          Arc: radius, signed angle, speed
    // Stop: duration                   Ramp: v0, v1, length
    double a{0.0};
    double b{0.0};
    double c{0.0};
    double grade{0.0};  // rad, positive uphill

    static Segment straight(double length, double speed, double grade = 0.0);
    static Segment arc(double radius, double angle, double speed, double grade = 0.0);
    static Segment stop(double duration);
    static Segment ramp(double v0, double v1, double length, double grade = 0.0);
};

struct TrackSpec {
    std::vector<Segment> segments;
    double rate_hz{200.0};
    double grade_blend_m{5.0};

    void validate() const;
};

// One truth sample: vehicle (wheel-center) kinematics plus the wheel angle.
struct TruthPoint {
    double t{0.0};
    Vec3 pos{Vec3::Zero()};   // NED, m
    Vec3 vel{Vec3::Zero()};   // NED, m/s
    double heading{0.0};      // vehicle yaw, rad
    double pitch{0.0};        // vehicle pitch (grade), rad
    double speed{0.0};        // along-track, m/s
    double distance{0.0};     // cumulative along-track, m
    double wheel_angle{0.0};  // rad
};

struct TruthData {
    std::vector<TruthPoint> points;
    double rate_hz{200.0};
    double total_distance{0.0};

    TruthSeries to_series() const;  // vehicle pose records for files/metrics
};

TruthData generate_truth(const TrackSpec& spec, double wheel_radius);

// Deterministic IMU error model (Table-I style). Seed fixes every stream.
struct ErrorSpec {
    Vec3 gyro_bias{Vec3::Zero()};    // rad/s
    Vec3 accel_bias{Vec3::Zero()};   // m/s^2
    Vec3 gyro_scale{Vec3::Zero()};
    Vec3 accel_scale{Vec3::Zero()};
    double arw{0.0};                 // rad/sqrt(s)
    double vrw{0.0};                 // m/s/sqrt(s)
    double gm_gyro_sigma{0.0};       // rad/s
    double gm_gyro_corr{1800.0};     // s
    double gm_accel_sigma{0.0};      // m/s^2
    double gm_accel_corr{1800.0};    // s
    std::uint64_t seed{0};
};

// Ideal wheel-IMU stream in the raw sensor frame (mounting errors included)
// plus the exact PVA of the mounting-corrected frame for closure checks.
struct WheelImuTruth {
    std::vector<ImuSample> ideal_b;
    std::vector<NavState> nav_w;
};

WheelImuTruth wheel_imu_truth(const TruthData& truth, const GeometryConfig& geo,
                              double gravity);

// Ideal body-mounted IMU (aligned with the vehicle frame), lever from the
// IMU to the measured wheel center in the body frame.
std::vector<ImuSample> body_imu_truth(const TruthData& truth, const Vec3& lever_b,
                                      double gravity);

// out = (1 + s) .* in + b_const + b_gm(t) + white, Gauss-Markov by its exact
// discrete recursion. stream_id decorrelates sensors sharing one seed.
std::vector<ImuSample> corrupt(const std::vector<ImuSample>& ideal, const ErrorSpec& err,
                               std::uint32_t stream_id = 0);

std::vector<OdoSample> make_odometer(const TruthData& truth, double rate_hz,
                                     double rmse, std::uint64_t seed,
                                     std::uint32_t stream_id = 100);

// Closed-form n-frame attitude error from constant gyro errors under
// constant-rate rotation about the body x axis:
//   x = eps_x t
//   y = (eps_y sin wt + eps_z (cos wt - 1)) / w
//   z = (eps_y (1 - cos wt) + eps_z sin wt) / w
// with the w -> 0 limit handled (linear growth).
Vec3 modulation_error(const Vec3& eps, double omega, double t);

// Full synthetic dataset (wheel + body IMU, odometer, truth).
struct SimOptions {
    TrackSpec track;
    ErrorSpec err;
    GeometryConfig geometry;
    Vec3 body_lever{-0.2, 0.35, 0.1};
    double odo_rate_hz{20.0};
    double odo_rmse{0.03};
    double gravity{kDefaultGravity};
};

struct SimDataset {
    std::vector<ImuSample> wheel_imu;
    std::vector<ImuSample> body_imu;
    std::vector<OdoSample> odometer;
    TruthSeries truth;
    double rate_hz{200.0};
};

SimDataset simulate_dataset(const SimOptions& opt);

// Named presets used by the CLI and the test suites.
TrackSpec track_preset(const std::string& name);
ErrorSpec imu_grade_preset(const std::string& name);
std::vector<std::string> track_preset_names();
std::vector<std::string> imu_grade_preset_names();

}  // namespace wheelins
