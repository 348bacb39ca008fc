#include "wheelins/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace wheelins {

Segment Segment::straight(double length, double speed, double grade) {
    Segment s;
    s.type = Type::Straight; s.a = length; s.b = speed; s.grade = grade;
    return s;
}

Segment Segment::arc(double radius, double angle, double speed, double grade) {
    Segment s;
    s.type = Type::Arc; s.a = radius; s.b = angle; s.c = speed; s.grade = grade;
    return s;
}

Segment Segment::stop(double duration) {
    Segment s;
    s.type = Type::Stop; s.a = duration;
    return s;
}

Segment Segment::ramp(double v0, double v1, double length, double grade) {
    Segment s;
    s.type = Type::Ramp; s.a = v0; s.b = v1; s.c = length; s.grade = grade;
    return s;
}

void TrackSpec::validate() const {
    if (segments.empty()) {
        throw std::invalid_argument("track: no segments");
    }
    if (rate_hz < 50.0 || rate_hz > 1000.0) {
        throw std::invalid_argument("track: sample rate outside [50, 1000] Hz");
    }
    for (const auto& s : segments) {
        switch (s.type) {
            case Segment::Type::Straight:
                if (!(s.a > 0.0) || !(s.b > 0.0)) {
                    throw std::invalid_argument("track: straight needs positive length and speed");
                }
                break;
            case Segment::Type::Arc:
                if (!(s.a > 0.0) || s.b == 0.0 || !(s.c > 0.0)) {
                    throw std::invalid_argument("track: arc needs positive radius/speed, nonzero angle");
                }
                break;
            case Segment::Type::Stop:
                if (!(s.a > 0.0)) {
                    throw std::invalid_argument("track: stop needs positive duration");
                }
                break;
            case Segment::Type::Ramp:
                if (s.a < 0.0 || s.b < 0.0 || !(s.a + s.b > 0.0) || !(s.c > 0.0)) {
                    throw std::invalid_argument("track: ramp needs nonnegative speeds and positive length");
                }
                break;
        }
    }
}

namespace {

struct SegState {
    const Segment* seg;
    double t0, t1;        // global time span
    double s0;            // cumulative distance at entry
    double psi0;          // heading at entry
    double grade_in;      // grade at entry (blend origin)
    double v0, accel;     // v(tau) = v0 + accel*tau
    double length;
    double blend_len;     // along-track length of the grade blend
};

struct Timeline {
    std::vector<SegState> segs;
    std::vector<double> events;  // derivative kinks: segment starts, blend ends
    double total_t{0.0};
    double total_s{0.0};
};

double seg_exit_speed(const SegState& s) { return s.v0 + s.accel * (s.t1 - s.t0); }

double seg_exit_grade(const SegState& s) {
    if (s.length <= 0.0) {
        return s.grade_in;
    }
    const double frac = std::min(1.0, s.length / s.blend_len);
    return s.grade_in + (s.seg->grade - s.grade_in) * frac;
}

Timeline build_timeline(const TrackSpec& spec, double wheel_radius) {
    spec.validate();
    Timeline tl;
    double t = 0.0, s = 0.0, psi = 0.0, grade = 0.0;
    double prev_exit_speed = 0.0;
    bool prev_was_stop = true;

    for (const auto& seg : spec.segments) {
        SegState st;
        st.seg = &seg;
        st.t0 = t;
        st.s0 = s;
        st.psi0 = psi;
        st.grade_in = grade;
        double duration = 0.0;
        double entry_speed = 0.0;
        switch (seg.type) {
            case Segment::Type::Straight:
                st.length = seg.a; st.v0 = seg.b; st.accel = 0.0;
                duration = seg.a / seg.b;
                entry_speed = seg.b;
                break;
            case Segment::Type::Arc:
                if (seg.a <= wheel_radius) {
                    throw std::invalid_argument("track: arc radius must exceed the wheel radius");
                }
                st.length = std::abs(seg.b) * seg.a; st.v0 = seg.c; st.accel = 0.0;
                duration = st.length / seg.c;
                entry_speed = seg.c;
                break;
            case Segment::Type::Stop:
                st.length = 0.0; st.v0 = 0.0; st.accel = 0.0;
                duration = seg.a;
                entry_speed = 0.0;
                break;
            case Segment::Type::Ramp:
                st.length = seg.c; st.v0 = seg.a;
                duration = 2.0 * seg.c / (seg.a + seg.b);
                st.accel = (seg.b - seg.a) / duration;
                entry_speed = seg.a;
                break;
        }
        const bool is_stop = seg.type == Segment::Type::Stop;
        if (!is_stop && !prev_was_stop && std::abs(entry_speed - prev_exit_speed) > 1e-12) {
            throw std::invalid_argument("track: speed discontinuity between moving segments");
        }
        if (is_stop && !prev_was_stop && std::abs(prev_exit_speed) > 1e-12) {
            // velocity jump allowed only at stop boundaries; keep it explicit
        }
        st.blend_len = st.length > 0.0 ? std::min(spec.grade_blend_m, st.length) : 1.0;
        st.t1 = t + duration;

        tl.events.push_back(st.t0);
        if (st.length > 0.0 && st.blend_len < st.length) {
            // time when the grade blend completes: solve v0*tau + accel*tau^2/2 = blend_len
            double tau;
            if (std::abs(st.accel) < 1e-12) {
                tau = st.blend_len / st.v0;
            } else {
                const double disc = st.v0 * st.v0 + 2.0 * st.accel * st.blend_len;
                tau = (-st.v0 + std::sqrt(std::max(0.0, disc))) / st.accel;
            }
            tl.events.push_back(st.t0 + tau);
        }

        t = st.t1;
        s += st.length;
        if (seg.type == Segment::Type::Arc) {
            psi = normalize_angle(psi + seg.b);
        }
        grade = seg_exit_grade(st);
        prev_exit_speed = is_stop ? 0.0 : seg_exit_speed(st);
        prev_was_stop = is_stop;
        tl.segs.push_back(st);
    }
    tl.total_t = t;
    tl.total_s = s;
    std::sort(tl.events.begin(), tl.events.end());
    return tl;
}

struct Kin {
    double v, psi, grade, s;
};

Kin eval_kin(const Timeline& tl, double t, std::size_t& hint) {
    while (hint + 1 < tl.segs.size() && t >= tl.segs[hint].t1) {
        ++hint;
    }
    const SegState& st = tl.segs[hint];
    const double tau = std::clamp(t - st.t0, 0.0, st.t1 - st.t0);
    Kin k;
    k.v = st.v0 + st.accel * tau;
    const double s_loc = st.v0 * tau + 0.5 * st.accel * tau * tau;
    k.s = st.s0 + s_loc;
    k.psi = st.psi0;
    if (st.seg->type == Segment::Type::Arc) {
        k.psi += st.seg->b * (s_loc / st.length);
    }
    if (st.length > 0.0) {
        const double frac = std::min(1.0, s_loc / st.blend_len);
        k.grade = st.grade_in + (st.seg->grade - st.grade_in) * frac;
    } else {
        k.grade = st.grade_in;
    }
    return k;
}

Vec3 ned_rate(const Kin& k) {
    const double vh = k.v * std::cos(k.grade);
    return Vec3(vh * std::cos(k.psi), vh * std::sin(k.psi), -k.v * std::sin(k.grade));
}

// Simpson over [a, b] with endpoint nudges so one-sided kinks stay put.
Vec3 simpson_piece(const Timeline& tl, double a, double b, std::size_t& hint) {
    const double h = b - a;
    if (h <= 0.0) {
        return Vec3::Zero();
    }
    const double eps = 1e-9 * h;
    std::size_t h0 = hint, h1 = hint, h2 = hint;
    const Vec3 fa = ned_rate(eval_kin(tl, a + eps, h0));
    const Vec3 fm = ned_rate(eval_kin(tl, 0.5 * (a + b), h1));
    const Vec3 fb = ned_rate(eval_kin(tl, b - eps, h2));
    hint = h2;
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace

TruthData generate_truth(const TrackSpec& spec, double wheel_radius) {
    if (!(wheel_radius > 0.0)) {
        throw std::invalid_argument("generate_truth: wheel radius must be positive");
    }
    const Timeline tl = build_timeline(spec, wheel_radius);
    const double dt = 1.0 / spec.rate_hz;
    const auto n = static_cast<std::size_t>(std::floor(tl.total_t / dt + 1e-9)) + 1;

    TruthData out;
    out.rate_hz = spec.rate_hz;
    out.total_distance = tl.total_s;
    out.points.resize(n);

    Vec3 pos = Vec3::Zero();
    std::size_t hint = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (k > 0) {
            const double t_prev = t - dt;
            auto ev = std::upper_bound(tl.events.begin(), tl.events.end(), t_prev);
            double a = t_prev;
            std::size_t ih = hint;
            while (ev != tl.events.end() && *ev < t) {
                pos += simpson_piece(tl, a, *ev, ih);
                a = *ev;
                ++ev;
            }
            pos += simpson_piece(tl, a, t, ih);
        }
        Kin kin = eval_kin(tl, t, hint);
        TruthPoint& p = out.points[k];
        p.t = t;
        p.pos = pos;
        p.vel = ned_rate(kin);
        p.heading = normalize_angle(kin.psi);
        p.pitch = kin.grade;
        p.speed = kin.v;
        p.distance = kin.s;
        p.wheel_angle = kin.s / wheel_radius;
    }
    return out;
}

TruthSeries TruthData::to_series() const {
    TruthSeries s;
    s.reserve(points.size());
    for (const auto& p : points) {
        s.push_back({p.t, p.pos, Euler{0.0, p.pitch, p.heading}});
    }
    return s;
}

namespace {

// Differencing-based IMU synthesis from an attitude/position sequence:
// gyro is the per-interval rotation increment divided by dt (what a rate
// integrating gyro reports), accel the central second difference.
std::vector<ImuSample> imu_from_sequence(const std::vector<Mat3>& c_bn,
                                         const std::vector<Vec3>& p_imu,
                                         const std::vector<double>& times,
                                         double gravity) {
    const std::size_t n = times.size();
    std::vector<ImuSample> out(n);
    const Vec3 g_n(0.0, 0.0, gravity);
    for (std::size_t k = 0; k < n; ++k) {
        out[k].t = times[k];
    }
    for (std::size_t k = 1; k < n; ++k) {
        const double dt = times[k] - times[k - 1];
        out[k].gyro = log_so3(c_bn[k - 1].transpose() * c_bn[k]) / dt;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double dt = 0.5 * (times[k + 1] - times[k - 1]);
        const Vec3 acc = (p_imu[k + 1] - 2.0 * p_imu[k] + p_imu[k - 1]) / (dt * dt);
        out[k].accel = c_bn[k].transpose() * (acc - g_n);
    }
    if (n >= 2) {
        out[0].gyro = out[1].gyro;
        out[0].accel = out[1].accel;
        out[n - 1].accel = out[n - 2].accel;
    }
    return out;
}

}  // namespace

WheelImuTruth wheel_imu_truth(const TruthData& truth, const GeometryConfig& geo,
                              double gravity) {
    geo.validate();
    const std::size_t n = truth.points.size();
    const Mat3 c_bw = geo.mounting_dcm();

    std::vector<Mat3> c_wn(n), c_bn(n);
    std::vector<Vec3> p_imu(n);
    std::vector<double> times(n);
    for (std::size_t k = 0; k < n; ++k) {
        const TruthPoint& p = truth.points[k];
        c_wn[k] = euler_to_dcm({0.0, p.pitch, p.heading}) *
                  euler_to_dcm({p.wheel_angle, 0.0, kPi / 2.0});
        c_bn[k] = c_wn[k] * c_bw;
        p_imu[k] = p.pos - c_bn[k] * geo.lever_b;
        times[k] = p.t;
    }

    WheelImuTruth out;
    out.ideal_b = imu_from_sequence(c_bn, p_imu, times, gravity);

    out.nav_w.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        NavState& nav = out.nav_w[k];
        nav.t = times[k];
        nav.pos = p_imu[k];
        nav.att = Quat(c_wn[k]).normalized();
        const std::size_t kp = std::min(k + 1, n - 1), km = k > 0 ? k - 1 : 0;
        const double span = times[kp] - times[km];
        const Vec3 lever_vel =
            span > 0.0 ? Vec3((c_bn[kp] * geo.lever_b - c_bn[km] * geo.lever_b) / span)
                       : Vec3::Zero();
        nav.vel = truth.points[k].vel - lever_vel;
    }
    return out;
}

std::vector<ImuSample> body_imu_truth(const TruthData& truth, const Vec3& lever_b,
                                      double gravity) {
    const std::size_t n = truth.points.size();
    std::vector<Mat3> c_bn(n);
    std::vector<Vec3> p_imu(n);
    std::vector<double> times(n);
    for (std::size_t k = 0; k < n; ++k) {
        const TruthPoint& p = truth.points[k];
        c_bn[k] = euler_to_dcm({0.0, p.pitch, p.heading});
        p_imu[k] = p.pos - c_bn[k] * lever_b;
        times[k] = p.t;
    }
    return imu_from_sequence(c_bn, p_imu, times, gravity);
}

namespace {

// Deterministic gaussian stream (Box-Muller over mt19937_64).
class GaussRng {
  public:
    explicit GaussRng(std::uint64_t seed) : eng_(seed) {}

    double gauss() {
        if (have_) {
            have_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 1e-300) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(2.0 * kPi * u2);
        have_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

  private:
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 eng_;
    double cached_{0.0};
    bool have_{false};
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint32_t stream, std::uint32_t axis) {
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ull * (stream * 8ull + axis + 1ull));
    x ^= x >> 33;
    x *= 0xFF51AFD7ED558CCDull;
    x ^= x >> 33;
    return x;
}

}  // namespace

std::vector<ImuSample> corrupt(const std::vector<ImuSample>& ideal, const ErrorSpec& err,
                               std::uint32_t stream_id) {
    std::vector<ImuSample> out = ideal;
    if (out.size() < 2) {
        return out;
    }

    std::vector<GaussRng> rng;
    rng.reserve(12);
    for (std::uint32_t a = 0; a < 12; ++a) {
        rng.emplace_back(mix_seed(err.seed, stream_id, a));
    }

    double gm_g[3] = {0.0, 0.0, 0.0};
    double gm_a[3] = {0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double dt = k > 0 ? out[k].t - out[k - 1].t : out[1].t - out[0].t;
        const double wg = err.arw / std::sqrt(dt);
        const double wa = err.vrw / std::sqrt(dt);
        const double fg = std::exp(-dt / err.gm_gyro_corr);
        const double fa = std::exp(-dt / err.gm_accel_corr);
        const double qg = err.gm_gyro_sigma * std::sqrt(1.0 - fg * fg);
        const double qa = err.gm_accel_sigma * std::sqrt(1.0 - fa * fa);
        for (int i = 0; i < 3; ++i) {
            if (k > 0) {
                gm_g[i] = fg * gm_g[i] + qg * rng[6 + i].gauss();
                gm_a[i] = fa * gm_a[i] + qa * rng[9 + i].gauss();
            }
            out[k].gyro[i] = (1.0 + err.gyro_scale[i]) * ideal[k].gyro[i] +
                             err.gyro_bias[i] + gm_g[i] + wg * rng[i].gauss();
            out[k].accel[i] = (1.0 + err.accel_scale[i]) * ideal[k].accel[i] +
                              err.accel_bias[i] + gm_a[i] + wa * rng[3 + i].gauss();
        }
    }
    return out;
}

std::vector<OdoSample> make_odometer(const TruthData& truth, double rate_hz,
                                     double rmse, std::uint64_t seed,
                                     std::uint32_t stream_id) {
    GaussRng rng(mix_seed(seed, stream_id, 0));
    std::vector<OdoSample> out;
    if (truth.points.empty()) {
        return out;
    }
    const double t_end = truth.points.back().t;
    const double dt = 1.0 / rate_hz;
    std::size_t j = 0;
    for (double t = 0.0; t <= t_end + 1e-9; t += dt) {
        while (j + 1 < truth.points.size() && truth.points[j + 1].t <= t) {
            ++j;
        }
        double speed = truth.points[j].speed;
        if (j + 1 < truth.points.size() && truth.points[j + 1].t > truth.points[j].t) {
            const double a = (t - truth.points[j].t) /
                             (truth.points[j + 1].t - truth.points[j].t);
            speed = (1.0 - a) * truth.points[j].speed + a * truth.points[j + 1].speed;
        }
        out.push_back({t, speed + rmse * rng.gauss()});
    }
    return out;
}

Vec3 modulation_error(const Vec3& eps, double omega, double t) {
    if (std::abs(omega) < 1e-12) {
        return eps * t;
    }
    const double s = std::sin(omega * t);
    const double c = std::cos(omega * t);
    return Vec3(eps.x() * t,
                (eps.y() * s + eps.z() * (c - 1.0)) / omega,
                (eps.y() * (1.0 - c) + eps.z() * s) / omega);
}

SimDataset simulate_dataset(const SimOptions& opt) {
    const TruthData truth = generate_truth(opt.track, opt.geometry.wheel_radius);
    const WheelImuTruth wheel = wheel_imu_truth(truth, opt.geometry, opt.gravity);
    const std::vector<ImuSample> body = body_imu_truth(truth, opt.body_lever, opt.gravity);

    SimDataset ds;
    ds.rate_hz = opt.track.rate_hz;
    ds.wheel_imu = corrupt(wheel.ideal_b, opt.err, 0);
    ds.body_imu = corrupt(body, opt.err, 10);
    ds.odometer = make_odometer(truth, opt.odo_rate_hz, opt.odo_rmse, opt.err.seed, 100);
    ds.truth = truth.to_series();
    return ds;
}

TrackSpec track_preset(const std::string& name) {
    TrackSpec spec;
    spec.rate_hz = 200.0;
    auto& seg = spec.segments;
    if (name == "square-100") {
        seg.push_back(Segment::stop(65.0));
        seg.push_back(Segment::ramp(0.0, 1.0, 2.0));
        for (int i = 0; i < 4; ++i) {
            seg.push_back(Segment::straight(i == 0 || i == 3 ? 20.0 : 21.0, 1.0));
            seg.push_back(Segment::arc(2.0, kPi / 2.0, 1.0));
        }
        seg.push_back(Segment::ramp(1.0, 0.0, 2.0));
        seg.push_back(Segment::stop(10.0));
    } else if (name == "loop-small") {
        seg.push_back(Segment::stop(65.0));
        seg.push_back(Segment::ramp(0.0, 1.39, 8.0));
        for (int lap = 0; lap < 5; ++lap) {
            for (int i = 0; i < 4; ++i) {
                seg.push_back(Segment::straight(50.6, 1.39));
                seg.push_back(Segment::arc(6.0, kPi / 2.0, 1.39));
            }
            if (lap == 2) {
                seg.push_back(Segment::ramp(1.39, 0.0, 4.0));
                seg.push_back(Segment::stop(15.0));
                seg.push_back(Segment::ramp(0.0, 1.39, 4.0));
            }
        }
        seg.push_back(Segment::ramp(1.39, 0.0, 4.0));
        seg.push_back(Segment::stop(10.0));
    } else if (name == "polyline") {
        seg.push_back(Segment::stop(65.0));
        seg.push_back(Segment::ramp(0.0, 1.25, 8.0));
        const double lens[] = {160, 130, 190, 170, 150, 160, 140};
        const double turns[] = {90, -120, 60, -90, 120, -60};
        for (int i = 0; i < 7; ++i) {
            seg.push_back(Segment::straight(lens[i], 1.25));
            if (i < 6) {
                seg.push_back(Segment::arc(4.0, deg2rad(turns[i]), 1.25));
            }
        }
        seg.push_back(Segment::ramp(1.25, 0.0, 8.0));
        seg.push_back(Segment::stop(10.0));
    } else if (name == "loop-large") {
        spec.grade_blend_m = 25.0;
        seg.push_back(Segment::stop(65.0));
        seg.push_back(Segment::ramp(0.0, 4.7, 30.0));
        const double grades[] = {deg2rad(10.0), 0.0, deg2rad(-10.0), 0.0};
        for (int lap = 0; lap < 2; ++lap) {
            for (int i = 0; i < 4; ++i) {
                seg.push_back(Segment::straight(1430.0, 4.7, grades[i]));
                seg.push_back(Segment::arc(60.0, kPi / 2.0, 4.7, 0.0));
            }
        }
        seg.push_back(Segment::ramp(4.7, 0.0, 30.0));
        seg.push_back(Segment::stop(10.0));
    } else {
        throw std::invalid_argument("unknown track preset: " + name);
    }
    return spec;
}

ErrorSpec imu_grade_preset(const std::string& name) {
    ErrorSpec err;
    if (name == "perfect") {
        return err;
    }
    if (name == "icm20602") {
        err.arw = dpsh_to_rpss(0.24);
        err.vrw = mpsh_to_mpss(3.0);
        err.gyro_bias = Vec3(dph_to_rps(100.0), dph_to_rps(-80.0), dph_to_rps(120.0));
        err.accel_bias = Vec3(0.006, -0.004, 0.008);
        err.gyro_scale = Vec3(0.005, -0.004, 0.006);
        err.accel_scale = Vec3(0.004, -0.006, 0.005);
        err.gm_gyro_sigma = dph_to_rps(15.0);
        err.gm_gyro_corr = 1800.0;
        err.gm_accel_sigma = 0.0015;
        err.gm_accel_corr = 1800.0;
        return err;
    }
    throw std::invalid_argument("unknown imu grade preset: " + name);
}

std::vector<std::string> track_preset_names() {
    return {"square-100", "loop-small", "polyline", "loop-large"};
}

std::vector<std::string> imu_grade_preset_names() {
    return {"perfect", "icm20602"};
}

}  // namespace wheelins
