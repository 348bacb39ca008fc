#include "wheelins/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wheelins {

namespace {

double interp_heading(double a, double b, double w) {
    return normalize_angle(a + w * normalize_angle(b - a));
}

}  // namespace

AlignedPair align(const std::vector<PoseRecord>& est,
                  const std::vector<PoseRecord>& truth) {
    if (est.empty() || truth.size() < 2) {
        throw std::invalid_argument("align: need estimates and at least two truth records");
    }
    if (est.front().t > truth.back().t || est.back().t < truth.front().t) {
        throw std::invalid_argument("align: estimate and truth time spans do not overlap");
    }

    // cumulative horizontal travel along the truth
    std::vector<double> cum(truth.size(), 0.0);
    for (std::size_t i = 1; i < truth.size(); ++i) {
        cum[i] = cum[i - 1] + (truth[i].pos.head<2>() - truth[i - 1].pos.head<2>()).norm();
    }

    AlignedPair out;
    out.total_distance = cum.back();
    out.items.reserve(est.size());

    std::size_t j = 1;
    for (const auto& e : est) {
        if (e.t < truth.front().t - 1e-9 || e.t > truth.back().t + 1e-9) {
            continue;
        }
        while (j + 1 < truth.size() && truth[j].t < e.t) {
            ++j;
        }
        const PoseRecord& b = truth[j];
        const PoseRecord& a = truth[j - 1];
        const double w = b.t > a.t ? std::clamp((e.t - a.t) / (b.t - a.t), 0.0, 1.0) : 0.0;

        AlignedItem item;
        item.t = e.t;
        item.est_pos = e.pos;
        item.est_heading = e.heading;
        item.est_vel = e.vel;
        item.truth_pos = (1.0 - w) * a.pos + w * b.pos;
        item.truth_heading = interp_heading(a.heading, b.heading, w);
        item.distance = (1.0 - w) * cum[j - 1] + w * cum[j];

        // truth velocity by central differences around the bracketing pair
        const std::size_t jp = std::min(j + 1, truth.size() - 1);
        const std::size_t jm = j >= 2 ? j - 2 : 0;
        const double span = truth[jp].t - truth[jm].t;
        item.truth_vel = span > 0.0 ? Vec3((truth[jp].pos - truth[jm].pos) / span)
                                    : Vec3::Zero();

        item.horiz_err = (item.est_pos.head<2>() - item.truth_pos.head<2>()).norm();
        item.heading_err = normalize_angle(item.est_heading - item.truth_heading);
        out.items.push_back(item);
    }
    if (out.items.empty()) {
        throw std::invalid_argument("align: no overlapping samples");
    }
    return out;
}

DriftResult segmented_drift(const AlignedPair& pair, double segment_length,
                            bool per_window) {
    if (!(segment_length > 0.0)) {
        throw std::invalid_argument("segmented_drift: segment length must be positive");
    }
    if (pair.total_distance < segment_length) {
        throw std::invalid_argument("segmented_drift: traveled distance shorter than one segment");
    }
    const int n_seg = static_cast<int>(std::floor(pair.total_distance / segment_length));

    DriftResult out;
    out.rates_pct.resize(n_seg, 0.0);
    for (int k = 1; k <= n_seg; ++k) {
        const double lo = per_window ? (k - 1) * segment_length : 0.0;
        const double hi = k * segment_length;
        double max_err = 0.0;
        for (const auto& it : pair.items) {
            if (it.distance >= lo && it.distance <= hi) {
                max_err = std::max(max_err, it.horiz_err);
            }
        }
        const double denom = per_window ? segment_length : hi;
        out.rates_pct[k - 1] = 100.0 * max_err / denom;
    }

    double mean = 0.0;
    for (double r : out.rates_pct) {
        mean += r;
    }
    mean /= static_cast<double>(n_seg);
    double var = 0.0;
    for (double r : out.rates_pct) {
        var += (r - mean) * (r - mean);
    }
    out.mean_pct = mean;
    out.std_pct = std::sqrt(var / static_cast<double>(n_seg));
    return out;
}

HeadingStats heading_stats(const AlignedPair& pair) {
    if (pair.items.empty()) {
        throw std::invalid_argument("heading_stats: empty pair");
    }
    double sq = 0.0, mx = 0.0;
    for (const auto& it : pair.items) {
        sq += it.heading_err * it.heading_err;
        mx = std::max(mx, std::abs(it.heading_err));
    }
    HeadingStats s;
    s.rmse_deg = rad2deg(std::sqrt(sq / static_cast<double>(pair.items.size())));
    s.max_deg = rad2deg(mx);
    return s;
}

double velocity_rms(const AlignedPair& pair) {
    if (pair.items.empty()) {
        throw std::invalid_argument("velocity_rms: empty pair");
    }
    double sq = 0.0;
    for (const auto& it : pair.items) {
        sq += (it.est_vel.head<2>() - it.truth_vel.head<2>()).squaredNorm();
    }
    return std::sqrt(sq / static_cast<double>(pair.items.size()));
}

}  // namespace wheelins
