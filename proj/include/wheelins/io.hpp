#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wheelins/filter.hpp"
#include "wheelins/metrics.hpp"
#include "wheelins/simulator.hpp"

namespace wheelins {

// Data-validation failures (exit code 2 at the CLI).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- plain-text CSV formats (units fixed by format, >= 17 significant digits)
// imu:      t, gx, gy, gz, ax, ay, az        [s, rad/s, m/s^2]
// truth:    t, n, e, d, roll, pitch, yaw     [s, m, rad]
// odometer: t, speed                         [s, m/s]
// nav:      t, n, e, d, vn, ve, vd, roll, pitch, yaw, psi_v

std::vector<ImuSample> load_imu(const std::string& path);
void save_imu(const std::string& path, const std::vector<ImuSample>& samples);

TruthSeries load_truth(const std::string& path);
void save_truth(const std::string& path, const TruthSeries& truth);

std::vector<OdoSample> load_odo(const std::string& path);
void save_odo(const std::string& path, const std::vector<OdoSample>& samples);

std::vector<PoseRecord> load_nav(const std::string& path);
void save_nav(const std::string& path, const FilterOutput& out);
void save_cov_diag(const std::string& path, const FilterOutput& out);
void save_sensor_errors(const std::string& path, const FilterOutput& out);
void save_update_log(const std::string& path, const FilterOutput& out);

std::vector<PoseRecord> to_pose_records(const TruthSeries& truth);

// --- flat key-value files: `section.key = value`, '#' comments -------------

class KeyValues {
  public:
    static KeyValues parse_file(const std::string& path);
    static KeyValues parse_string(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const;
    double get_double(const std::string& key, double fallback);
    int get_int(const std::string& key, int fallback);
    bool get_bool(const std::string& key, bool fallback);
    Vec3 get_vec3(const std::string& key, const Vec3& fallback);
    std::string get_string(const std::string& key, const std::string& fallback);

    // throws IoError listing every key that was never read (typo guard)
    void require_all_consumed() const;

    void set(const std::string& key, const std::string& value);
    void set_double(const std::string& key, double value);
    void set_vec3(const std::string& key, const Vec3& value);
    std::string serialize() const;

  private:
    std::string raw(const std::string& key);
    struct Entry {
        std::string value;
        int line{0};
        bool consumed{false};
    };
    std::map<std::string, Entry> entries_;
    std::vector<std::string> order_;
    std::string origin_;
};

// Parses and fully validates a filter configuration; unknown keys are errors
// and geometry.wheel_radius is required.
FilterConfig load_config(const std::string& path);
FilterConfig config_from_keyvalues(KeyValues& kv);

// All defaults spelled out; parsing this yields the same FilterConfig as a
// minimal file containing only the wheel radius.
std::string default_config_text(double wheel_radius);

// --- dataset directories ----------------------------------------------------

struct LoadedDataset {
    std::vector<ImuSample> wheel_imu;
    std::vector<ImuSample> body_imu;
    std::vector<OdoSample> odometer;
    TruthSeries truth;
    double rate_hz{0.0};
    KeyValues manifest;
    bool has_wheel{false};
    bool has_body{false};
    bool has_odo{false};
};

void write_dataset(const std::string& dir, const SimDataset& ds,
                   const std::vector<std::pair<std::string, std::string>>& manifest_extra);

// Loads every stream named by the manifest and validates declared rates
// against the observed median sample period (1% tolerance).
LoadedDataset load_dataset(const std::string& dir);

void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& entries);

std::string format_double(double v);  // round-trip precision

// --- simulator input files ---------------------------------------------------

// Track spec file: `rate_hz = ...`, `grade_blend_m = ...` and one line per
// segment, e.g. `segment = straight 100 1.39 grade=0.17`,
// `segment = arc 6 1.5708 1.39`, `segment = stop 15`,
// `segment = ramp 0 1.39 8`.
TrackSpec load_track_spec(const std::string& path);

// IMU grade file: imu.arw_dpsh, imu.vrw_mpsh, imu.gyro_bias_dph (triple),
// imu.accel_bias_mps2, imu.gyro_scale_ppm, imu.accel_scale_ppm,
// imu.gm_gyro_sigma_dph, imu.gm_gyro_corr_s, imu.gm_accel_sigma_mps2,
// imu.gm_accel_corr_s.
ErrorSpec load_imu_grade(const std::string& path);

struct SimGeometry {
    GeometryConfig geometry;
    Vec3 body_lever{-0.2, 0.35, 0.1};
    double odo_rate_hz{20.0};
    double odo_rmse{0.03};
};

// geometry.* keys as in the filter config, plus odo.lever_arm,
// sim.odo_rate_hz, sim.odo_rmse_mps.
SimGeometry load_sim_geometry(const std::string& path);

}  // namespace wheelins
