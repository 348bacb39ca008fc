#pragma once

#include <vector>

#include "wheelins/types.hpp"

namespace wheelins {

// Normalized pose record for evaluation: estimates carry the vehicle heading,
// truth carries its file yaw. Velocity optional (zero when absent).
struct PoseRecord {
    double t{0.0};
    Vec3 pos{Vec3::Zero()};
    double heading{0.0};
    Vec3 vel{Vec3::Zero()};
    bool has_vel{false};
};

struct AlignedItem {
    double t{0.0};
    Vec3 est_pos{Vec3::Zero()};
    Vec3 truth_pos{Vec3::Zero()};
    double est_heading{0.0};
    double truth_heading{0.0};
    Vec3 est_vel{Vec3::Zero()};
    Vec3 truth_vel{Vec3::Zero()};
    double distance{0.0};       // cumulative truth travel, horizontal, m
    double horiz_err{0.0};      // m
    double heading_err{0.0};    // rad, wrapped
};

struct AlignedPair {
    std::vector<AlignedItem> items;
    double total_distance{0.0};
};

// Interpolates truth (linear position, circular heading) onto the estimate
// timestamps; truth velocity by central differences of truth positions.
// Only estimate epochs inside the truth time span are kept.
AlignedPair align(const std::vector<PoseRecord>& est, const std::vector<PoseRecord>& truth);

struct DriftResult {
    double mean_pct{0.0};
    double std_pct{0.0};                // 1-sigma over segment rates
    std::vector<double> rates_pct;      // per k: max err within [0, k*l] / (k*l)
};

// Paper metric: maximum horizontal drift rate over cumulative prefixes
// [0, k*l]. per_window = true evaluates disjoint windows [(k-1)l, kl) instead.
DriftResult segmented_drift(const AlignedPair& pair, double segment_length = 100.0,
                            bool per_window = false);

struct HeadingStats {
    double rmse_deg{0.0};
    double max_deg{0.0};
};

HeadingStats heading_stats(const AlignedPair& pair);

// RMS of the horizontal velocity error magnitude.
double velocity_rms(const AlignedPair& pair);

}  // namespace wheelins
