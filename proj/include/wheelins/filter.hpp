#pragma once

#include <optional>
#include <vector>

#include "wheelins/errormodel.hpp"
#include "wheelins/mechanization.hpp"
#include "wheelins/observations.hpp"

namespace wheelins {

enum class FilterMode { WheelIns, OdoIns };

struct InitialStd {
    double pos{0.01};               // m
    double vel{0.01};               // m/s
    double att{deg2rad(0.5)};       // rad, roll/pitch
    double heading{deg2rad(0.5)};   // rad
    double bg{dph_to_rps(200.0)};   // rad/s
    double ba{0.01};                // m/s^2
    double sg{ppm(1000.0)};
    double sa{ppm(1000.0)};
};

struct FilterConfig {
    FilterMode mode{FilterMode::WheelIns};
    DimMode dim_mode{DimMode::Full21};
    double gravity{kDefaultGravity};
    GeometryConfig geometry;               // wheel-IMU installation
    Vec3 odo_lever_b{Vec3::Zero()};        // odo-ins: body IMU -> measured wheel center
    NoisePsd noise{NoisePsd::defaults()};
    InitialStd init_std;

    double static_span_s{60.0};
    bool estimate_initial_gyro_bias{true};

    double meas_cadence_s{1.0};
    double forward_speed_std{0.03};        // m/s
    double nhc_std{0.05};                  // m/s
    bool gate_enable{true};
    bool gyro_speed_coupling{false};

    bool zupt_enable{true};
    bool zihr_enable{true};
    double zupt_std{0.01};                 // m/s
    double zihr_std{deg2rad(0.02)};        // rad per interval
    double zihr_engage_s{2.0};
    StationaryThresholds stationary;
    double stationary_window_s{1.0};

    std::optional<double> heading_offset;  // default: pi/2 wheel-ins, 0 odo-ins
    double out_decimation_s{0.1};
    int cov_check_interval{0};             // samples between PSD checks, 0 = off
    double max_gap_factor{5.0};

    double effective_heading_offset() const;
    void validate() const;
};

struct UpdateEvent {
    enum class Type { WheelSpeed, OdoSpeed, Zupt, Zihr };
    double t{0.0};
    Type type{Type::WheelSpeed};
    int dof{0};
    double gamma{0.0};
    bool accepted{true};
};

struct OutputRecord {
    double t{0.0};
    Vec3 pos{Vec3::Zero()};   // vehicle (wheel-center) point
    Vec3 vel{Vec3::Zero()};
    Euler att;                // mechanization-frame attitude
    double psi_v{0.0};        // vehicle heading
    StateVec p_diag;
    SensorErrors errors;
};

struct FilterOutput {
    std::vector<OutputRecord> records;
    std::vector<UpdateEvent> updates;
    std::vector<double> divergence_times;
    int skipped_updates{0};
    // covariance-health summary over the periodic checks
    double min_eigen_trace_ratio{1.0};
    double max_asymmetry{0.0};
};

struct RunInput {
    std::vector<ImuSample> imu;   // raw stream of the active mode
    TruthSeries truth;            // initial heading/position source
    std::vector<OdoSample> odo;   // odo-ins speed source
};

// --- EKF pieces -----------------------------------------------------------

void predict_step(ErrorState& state, const StateMat& Phi, const StateMat& Qd);

struct UpdateResult {
    bool accepted{false};
    bool skipped{false};  // singular innovation covariance
    double gamma{0.0};
};

// Joseph-form measurement update with an optional chi-square gate on the
// normalized innovation. On success the correction is accumulated in
// state.dx (zero beforehand in closed-loop operation).
UpdateResult update_step(ErrorState& state, const LinearMeasurement& m, bool gate,
                         double gate_threshold);

double chi2_gate_999(int dof);

struct FeedbackResult {
    bool divergence{false};
};

// Applies state.dx to the nominal state and accumulated sensor errors, then
// zeroes it. Attitude correction on the n-side: C <- exp(phi x) * C_hat.
FeedbackResult feedback(NavState& nav, SensorErrors& errors, ErrorState& state);

struct InitResult {
    NavState nav;
    ErrorState state;
    SensorErrors errors;
    double t_init{0.0};
    StaticAlignment alignment;
};

// Static alignment over the leading window + heading/position from truth.
InitResult init_filter(const RunInput& in, const FilterConfig& cfg);

FilterOutput run_filter(const RunInput& in, const FilterConfig& cfg);

}  // namespace wheelins
