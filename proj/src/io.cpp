#include "wheelins/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace wheelins {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double_field(const std::string& field, const std::string& path, int line) {
    const std::string t = trim(field);
    double v = 0.0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    auto [p, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || p != end || t.empty()) {
        throw IoError(path + ":" + std::to_string(line) + ": malformed number '" + t + "'");
    }
    if (!std::isfinite(v)) {
        throw IoError(path + ":" + std::to_string(line) + ": non-finite value");
    }
    return v;
}

std::vector<double> parse_csv_line(const std::string& line, std::size_t expected,
                                   const std::string& path, int lineno) {
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        const std::string field =
            comma == std::string::npos ? line.substr(start) : line.substr(start, comma - start);
        out.push_back(parse_double_field(field, path, lineno));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    if (out.size() != expected) {
        throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(expected) + " fields, got " + std::to_string(out.size()));
    }
    return out;
}

template <typename Fn>
void for_each_csv_line(const std::string& path, std::size_t fields, Fn&& fn) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        fn(parse_csv_line(t, fields, path, lineno), lineno);
    }
}

void check_monotone(double prev_t, double t, const std::string& path, int lineno) {
    if (!(t > prev_t)) {
        throw IoError(path + ":" + std::to_string(lineno) + ": non-monotone timestamp");
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    return out;
}

}  // namespace

std::vector<ImuSample> load_imu(const std::string& path) {
    std::vector<ImuSample> out;
    double prev_t = -1e300;
    for_each_csv_line(path, 7, [&](const std::vector<double>& f, int lineno) {
        check_monotone(prev_t, f[0], path, lineno);
        prev_t = f[0];
        ImuSample s;
        s.t = f[0];
        s.gyro = Vec3(f[1], f[2], f[3]);
        s.accel = Vec3(f[4], f[5], f[6]);
        out.push_back(s);
    });
    if (out.empty()) {
        throw IoError(path + ": no records");
    }
    return out;
}

void save_imu(const std::string& path, const std::vector<ImuSample>& samples) {
    auto out = open_out(path);
    for (const auto& s : samples) {
        out << format_double(s.t) << ',' << format_double(s.gyro.x()) << ','
            << format_double(s.gyro.y()) << ',' << format_double(s.gyro.z()) << ','
            << format_double(s.accel.x()) << ',' << format_double(s.accel.y()) << ','
            << format_double(s.accel.z()) << '\n';
    }
}

TruthSeries load_truth(const std::string& path) {
    TruthSeries out;
    double prev_t = -1e300;
    for_each_csv_line(path, 7, [&](const std::vector<double>& f, int lineno) {
        check_monotone(prev_t, f[0], path, lineno);
        prev_t = f[0];
        out.push_back({f[0], Vec3(f[1], f[2], f[3]), Euler{f[4], f[5], f[6]}});
    });
    if (out.empty()) {
        throw IoError(path + ": no records");
    }
    return out;
}

void save_truth(const std::string& path, const TruthSeries& truth) {
    auto out = open_out(path);
    for (const auto& s : truth) {
        out << format_double(s.t) << ',' << format_double(s.pos.x()) << ','
            << format_double(s.pos.y()) << ',' << format_double(s.pos.z()) << ','
            << format_double(s.att.roll) << ',' << format_double(s.att.pitch) << ','
            << format_double(s.att.yaw) << '\n';
    }
}

std::vector<OdoSample> load_odo(const std::string& path) {
    std::vector<OdoSample> out;
    double prev_t = -1e300;
    for_each_csv_line(path, 2, [&](const std::vector<double>& f, int lineno) {
        check_monotone(prev_t, f[0], path, lineno);
        prev_t = f[0];
        out.push_back({f[0], f[1]});
    });
    if (out.empty()) {
        throw IoError(path + ": no records");
    }
    return out;
}

void save_odo(const std::string& path, const std::vector<OdoSample>& samples) {
    auto out = open_out(path);
    for (const auto& s : samples) {
        out << format_double(s.t) << ',' << format_double(s.speed) << '\n';
    }
}

std::vector<PoseRecord> load_nav(const std::string& path) {
    std::vector<PoseRecord> out;
    double prev_t = -1e300;
    for_each_csv_line(path, 11, [&](const std::vector<double>& f, int lineno) {
        check_monotone(prev_t, f[0], path, lineno);
        prev_t = f[0];
        PoseRecord r;
        r.t = f[0];
        r.pos = Vec3(f[1], f[2], f[3]);
        r.vel = Vec3(f[4], f[5], f[6]);
        r.has_vel = true;
        r.heading = f[10];
        out.push_back(r);
    });
    if (out.empty()) {
        throw IoError(path + ": no records");
    }
    return out;
}

void save_nav(const std::string& path, const FilterOutput& out_data) {
    auto out = open_out(path);
    for (const auto& r : out_data.records) {
        out << format_double(r.t) << ',' << format_double(r.pos.x()) << ','
            << format_double(r.pos.y()) << ',' << format_double(r.pos.z()) << ','
            << format_double(r.vel.x()) << ',' << format_double(r.vel.y()) << ','
            << format_double(r.vel.z()) << ',' << format_double(r.att.roll) << ','
            << format_double(r.att.pitch) << ',' << format_double(r.att.yaw) << ','
            << format_double(r.psi_v) << '\n';
    }
}

void save_cov_diag(const std::string& path, const FilterOutput& out_data) {
    auto out = open_out(path);
    for (const auto& r : out_data.records) {
        out << format_double(r.t);
        for (int i = 0; i < r.p_diag.size(); ++i) {
            out << ',' << format_double(r.p_diag[i]);
        }
        out << '\n';
    }
}

void save_sensor_errors(const std::string& path, const FilterOutput& out_data) {
    auto out = open_out(path);
    for (const auto& r : out_data.records) {
        out << format_double(r.t);
        for (const Vec3* v : {&r.errors.bg, &r.errors.ba, &r.errors.sg, &r.errors.sa}) {
            for (int i = 0; i < 3; ++i) {
                out << ',' << format_double((*v)[i]);
            }
        }
        out << '\n';
    }
}

void save_update_log(const std::string& path, const FilterOutput& out_data) {
    auto out = open_out(path);
    for (const auto& u : out_data.updates) {
        const char* type = "";
        switch (u.type) {
            case UpdateEvent::Type::WheelSpeed: type = "wheel-speed"; break;
            case UpdateEvent::Type::OdoSpeed: type = "odo-speed"; break;
            case UpdateEvent::Type::Zupt: type = "zupt"; break;
            case UpdateEvent::Type::Zihr: type = "zihr"; break;
        }
        out << format_double(u.t) << ' ' << type << " dof=" << u.dof
            << " gamma=" << format_double(u.gamma)
            << (u.accepted ? " accepted" : " rejected") << '\n';
    }
    for (double t : out_data.divergence_times) {
        out << format_double(t) << " divergence-flag\n";
    }
}

std::vector<PoseRecord> to_pose_records(const TruthSeries& truth) {
    std::vector<PoseRecord> out;
    out.reserve(truth.size());
    for (const auto& s : truth) {
        PoseRecord r;
        r.t = s.t;
        r.pos = s.pos;
        r.heading = s.att.yaw;
        out.push_back(r);
    }
    return out;
}

// --- KeyValues --------------------------------------------------------------

KeyValues KeyValues::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

KeyValues KeyValues::parse_string(const std::string& text, const std::string& origin) {
    KeyValues kv;
    kv.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw IoError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw IoError(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        if (kv.entries_.count(key)) {
            throw IoError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        kv.entries_[key] = Entry{value, lineno, false};
        kv.order_.push_back(key);
    }
    return kv;
}

bool KeyValues::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValues::raw(const std::string& key) {
    auto it = entries_.find(key);
    it->second.consumed = true;
    return it->second.value;
}

double KeyValues::get_double(const std::string& key, double fallback) {
    if (!has(key)) {
        return fallback;
    }
    const std::string v = raw(key);
    return parse_double_field(v, origin_, entries_[key].line);
}

int KeyValues::get_int(const std::string& key, int fallback) {
    if (!has(key)) {
        return fallback;
    }
    const double d = parse_double_field(raw(key), origin_, entries_[key].line);
    return static_cast<int>(std::llround(d));
}

bool KeyValues::get_bool(const std::string& key, bool fallback) {
    if (!has(key)) {
        return fallback;
    }
    const std::string v = raw(key);
    if (v == "true" || v == "1" || v == "on") {
        return true;
    }
    if (v == "false" || v == "0" || v == "off") {
        return false;
    }
    throw IoError(origin_ + ": key '" + key + "' must be true/false");
}

Vec3 KeyValues::get_vec3(const std::string& key, const Vec3& fallback) {
    if (!has(key)) {
        return fallback;
    }
    const std::string v = raw(key);
    const int line = entries_[key].line;
    const std::vector<double> f = parse_csv_line(v, 3, origin_, line);
    return Vec3(f[0], f[1], f[2]);
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) {
    if (!has(key)) {
        return fallback;
    }
    return raw(key);
}

void KeyValues::require_all_consumed() const {
    std::string unknown;
    for (const auto& [key, entry] : entries_) {
        if (!entry.consumed) {
            unknown += (unknown.empty() ? "" : ", ") + key;
        }
    }
    if (!unknown.empty()) {
        throw IoError(origin_ + ": unknown keys: " + unknown);
    }
}

void KeyValues::set(const std::string& key, const std::string& value) {
    if (!entries_.count(key)) {
        order_.push_back(key);
    }
    entries_[key] = Entry{value, 0, true};
}

void KeyValues::set_double(const std::string& key, double value) {
    set(key, format_double(value));
}

void KeyValues::set_vec3(const std::string& key, const Vec3& value) {
    set(key, format_double(value.x()) + ", " + format_double(value.y()) + ", " +
             format_double(value.z()));
}

std::string KeyValues::serialize() const {
    std::string out;
    for (const auto& key : order_) {
        out += key + " = " + entries_.at(key).value + "\n";
    }
    return out;
}

// --- config ------------------------------------------------------------------

FilterConfig config_from_keyvalues(KeyValues& kv) {
    FilterConfig cfg;
    if (!kv.has("geometry.wheel_radius")) {
        throw IoError("config: missing required key geometry.wheel_radius");
    }
    cfg.geometry.wheel_radius = kv.get_double("geometry.wheel_radius", 0.0);
    cfg.geometry.lever_b = kv.get_vec3("geometry.lever_arm", Vec3::Zero());
    cfg.geometry.mounting_pitch = deg2rad(kv.get_double("geometry.mounting_pitch_deg", 0.0));
    cfg.geometry.mounting_yaw = deg2rad(kv.get_double("geometry.mounting_yaw_deg", 0.0));
    cfg.geometry.speed_sign = kv.get_double("geometry.speed_sign", 1.0);

    const std::string mode = kv.get_string("filter.mode", "wheel-ins");
    if (mode == "wheel-ins") {
        cfg.mode = FilterMode::WheelIns;
    } else if (mode == "odo-ins") {
        cfg.mode = FilterMode::OdoIns;
    } else {
        throw IoError("config: filter.mode must be wheel-ins or odo-ins");
    }
    cfg.dim_mode = dim_mode_from_int(kv.get_int("filter.state_dim", 21));
    cfg.gravity = kv.get_double("filter.gravity", kDefaultGravity);

    cfg.static_span_s = kv.get_double("init.static_span_s", 60.0);
    cfg.estimate_initial_gyro_bias = kv.get_bool("init.estimate_gyro_bias", true);
    cfg.init_std.pos = kv.get_double("init.pos_std_m", 0.01);
    cfg.init_std.vel = kv.get_double("init.vel_std_mps", 0.01);
    cfg.init_std.att = deg2rad(kv.get_double("init.att_std_deg", 0.5));
    cfg.init_std.heading = deg2rad(kv.get_double("init.heading_std_deg", 0.5));
    cfg.init_std.bg = dph_to_rps(kv.get_double("init.gyro_bias_std_dph", 200.0));
    cfg.init_std.ba = kv.get_double("init.accel_bias_std_mps2", 0.01);
    cfg.init_std.sg = ppm(kv.get_double("init.gyro_scale_std_ppm", 1000.0));
    cfg.init_std.sa = ppm(kv.get_double("init.accel_scale_std_ppm", 1000.0));

    cfg.noise.arw = dpsh_to_rpss(kv.get_double("noise.arw_dpsh", 0.24));
    cfg.noise.vrw = mpsh_to_mpss(kv.get_double("noise.vrw_mpsh", 3.0));
    const double corr = kv.get_double("noise.gm_corr_time_s", 3600.0);
    cfg.noise.gm.t_bg = cfg.noise.gm.t_ba = cfg.noise.gm.t_sg = cfg.noise.gm.t_sa = corr;
    cfg.noise.gm.q_bg = GmParams::psd_from_sigma(
        dph_to_rps(kv.get_double("noise.gm_gyro_bias_dph", 200.0)), corr);
    cfg.noise.gm.q_ba = GmParams::psd_from_sigma(
        kv.get_double("noise.gm_accel_bias_mps2", 0.01), corr);
    cfg.noise.gm.q_sg = GmParams::psd_from_sigma(
        ppm(kv.get_double("noise.gm_gyro_scale_ppm", 1000.0)), corr);
    cfg.noise.gm.q_sa = GmParams::psd_from_sigma(
        ppm(kv.get_double("noise.gm_accel_scale_ppm", 1000.0)), corr);

    cfg.meas_cadence_s = kv.get_double("meas.cadence_s", 1.0);
    cfg.forward_speed_std = kv.get_double("meas.forward_speed_std_mps", 0.03);
    cfg.nhc_std = kv.get_double("meas.nhc_std_mps", 0.05);
    cfg.gate_enable = kv.get_bool("meas.gate_enable", true);
    cfg.gyro_speed_coupling = kv.get_bool("meas.gyro_speed_coupling", false);
    if (kv.has("meas.heading_offset_deg")) {
        cfg.heading_offset = deg2rad(kv.get_double("meas.heading_offset_deg", 0.0));
    }
    cfg.odo_lever_b = kv.get_vec3("odo.lever_arm", Vec3::Zero());

    cfg.zupt_enable = kv.get_bool("zupt.enable", true);
    cfg.zihr_enable = kv.get_bool("zupt.zihr_enable", true);
    cfg.zupt_std = kv.get_double("zupt.vel_std_mps", 0.01);
    cfg.zihr_std = deg2rad(kv.get_double("zupt.zihr_std_deg", 0.02));
    cfg.zihr_engage_s = kv.get_double("zupt.zihr_engage_s", 2.0);
    cfg.stationary_window_s = kv.get_double("zupt.window_s", 1.0);
    cfg.stationary.gyro_std = deg2rad(kv.get_double("zupt.gyro_std_dps", 0.2));
    cfg.stationary.gyro_mean_x = deg2rad(kv.get_double("zupt.gyro_mean_dps", 0.5));
    cfg.stationary.accel_std = kv.get_double("zupt.accel_std_mps2", 1.0);
    cfg.stationary.speed = kv.get_double("zupt.speed_mps", 0.05);

    cfg.out_decimation_s = kv.get_double("out.decimation_s", 0.1);
    cfg.cov_check_interval = kv.get_int("out.cov_check_interval", 0);

    kv.require_all_consumed();
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw IoError(std::string("config: ") + e.what());
    }
    return cfg;
}

FilterConfig load_config(const std::string& path) {
    KeyValues kv = KeyValues::parse_file(path);
    return config_from_keyvalues(kv);
}

std::string default_config_text(double wheel_radius) {
    std::string s;
    s += "geometry.wheel_radius = " + format_double(wheel_radius) + "\n";
    s += "geometry.lever_arm = 0, 0, 0\n";
    s += "geometry.mounting_pitch_deg = 0\n";
    s += "geometry.mounting_yaw_deg = 0\n";
    s += "geometry.speed_sign = 1\n";
    s += "filter.mode = wheel-ins\n";
    s += "filter.state_dim = 21\n";
    s += "filter.gravity = 9.80665\n";
    s += "init.static_span_s = 60\n";
    s += "init.estimate_gyro_bias = true\n";
    s += "init.pos_std_m = 0.01\n";
    s += "init.vel_std_mps = 0.01\n";
    s += "init.att_std_deg = 0.5\n";
    s += "init.heading_std_deg = 0.5\n";
    s += "init.gyro_bias_std_dph = 200\n";
    s += "init.accel_bias_std_mps2 = 0.01\n";
    s += "init.gyro_scale_std_ppm = 1000\n";
    s += "init.accel_scale_std_ppm = 1000\n";
    s += "noise.arw_dpsh = 0.24\n";
    s += "noise.vrw_mpsh = 3\n";
    s += "noise.gm_corr_time_s = 3600\n";
    s += "noise.gm_gyro_bias_dph = 200\n";
    s += "noise.gm_accel_bias_mps2 = 0.01\n";
    s += "noise.gm_gyro_scale_ppm = 1000\n";
    s += "noise.gm_accel_scale_ppm = 1000\n";
    s += "meas.cadence_s = 1\n";
    s += "meas.forward_speed_std_mps = 0.03\n";
    s += "meas.nhc_std_mps = 0.05\n";
    s += "meas.gate_enable = true\n";
    s += "meas.gyro_speed_coupling = false\n";
    s += "odo.lever_arm = 0, 0, 0\n";
    s += "zupt.enable = true\n";
    s += "zupt.zihr_enable = true\n";
    s += "zupt.vel_std_mps = 0.01\n";
    s += "zupt.zihr_std_deg = 0.02\n";
    s += "zupt.zihr_engage_s = 2\n";
    s += "zupt.window_s = 1\n";
    s += "zupt.gyro_std_dps = 0.2\n";
    s += "zupt.gyro_mean_dps = 0.5\n";
    s += "zupt.accel_std_mps2 = 1\n";
    s += "zupt.speed_mps = 0.05\n";
    s += "out.decimation_s = 0.1\n";
    s += "out.cov_check_interval = 0\n";
    return s;
}

// --- dataset -----------------------------------------------------------------

void write_dataset(const std::string& dir, const SimDataset& ds,
                   const std::vector<std::pair<std::string, std::string>>& manifest_extra) {
    fs::create_directories(dir);
    save_imu(dir + "/wheel_imu.csv", ds.wheel_imu);
    save_imu(dir + "/body_imu.csv", ds.body_imu);
    save_odo(dir + "/odometer.csv", ds.odometer);
    save_truth(dir + "/truth.csv", ds.truth);

    KeyValues kv;
    kv.set_double("dataset.rate_hz", ds.rate_hz);
    kv.set("dataset.wheel_imu", "wheel_imu.csv");
    kv.set("dataset.body_imu", "body_imu.csv");
    kv.set("dataset.odometer", "odometer.csv");
    kv.set("dataset.truth", "truth.csv");
    for (const auto& [k, v] : manifest_extra) {
        kv.set(k, v);
    }
    auto out = open_out(dir + "/manifest.txt");
    out << kv.serialize();
}

namespace {

double median_dt(const std::vector<double>& times) {
    std::vector<double> dts;
    dts.reserve(times.size());
    for (std::size_t i = 1; i < times.size(); ++i) {
        dts.push_back(times[i] - times[i - 1]);
    }
    std::sort(dts.begin(), dts.end());
    return dts.empty() ? 0.0 : dts[dts.size() / 2];
}

void check_rate(const std::string& name, double rate_hz,
                const std::vector<double>& times) {
    const double dt = median_dt(times);
    if (dt <= 0.0 || std::abs(dt * rate_hz - 1.0) > 0.01) {
        throw IoError("dataset: " + name + " observed rate " +
                      format_double(dt > 0 ? 1.0 / dt : 0.0) +
                      " Hz does not match declared " + format_double(rate_hz) + " Hz");
    }
}

}  // namespace

LoadedDataset load_dataset(const std::string& dir) {
    LoadedDataset ds;
    ds.manifest = KeyValues::parse_file(dir + "/manifest.txt");
    ds.rate_hz = ds.manifest.get_double("dataset.rate_hz", 0.0);
    if (!(ds.rate_hz > 0.0)) {
        throw IoError("dataset: manifest missing dataset.rate_hz");
    }

    const std::string wheel = ds.manifest.get_string("dataset.wheel_imu", "");
    const std::string body = ds.manifest.get_string("dataset.body_imu", "");
    const std::string odo = ds.manifest.get_string("dataset.odometer", "");
    const std::string truth = ds.manifest.get_string("dataset.truth", "");
    if (truth.empty()) {
        throw IoError("dataset: manifest missing dataset.truth");
    }
    ds.truth = load_truth(dir + "/" + truth);

    auto times_of = [](const std::vector<ImuSample>& v) {
        std::vector<double> t;
        t.reserve(v.size());
        for (const auto& s : v) {
            t.push_back(s.t);
        }
        return t;
    };
    if (!wheel.empty()) {
        ds.wheel_imu = load_imu(dir + "/" + wheel);
        ds.has_wheel = true;
        check_rate("wheel imu", ds.rate_hz, times_of(ds.wheel_imu));
    }
    if (!body.empty()) {
        ds.body_imu = load_imu(dir + "/" + body);
        ds.has_body = true;
        check_rate("body imu", ds.rate_hz, times_of(ds.body_imu));
    }
    if (!odo.empty()) {
        ds.odometer = load_odo(dir + "/" + odo);
        ds.has_odo = true;
    }
    return ds;
}

void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& entries) {
    auto out = open_out(path);
    for (const auto& [k, v] : entries) {
        out << k << " = " << v << '\n';
    }
}

TrackSpec load_track_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open track file: " + path);
    }
    TrackSpec spec;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw IoError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key == "rate_hz") {
            spec.rate_hz = parse_double_field(value, path, lineno);
        } else if (key == "grade_blend_m") {
            spec.grade_blend_m = parse_double_field(value, path, lineno);
        } else if (key == "segment") {
            std::istringstream ss(value);
            std::string type;
            ss >> type;
            std::vector<double> args;
            double grade = 0.0;
            std::string tok;
            while (ss >> tok) {
                if (tok.rfind("grade=", 0) == 0) {
                    grade = parse_double_field(tok.substr(6), path, lineno);
                } else {
                    args.push_back(parse_double_field(tok, path, lineno));
                }
            }
            auto need = [&](std::size_t n) {
                if (args.size() != n) {
                    throw IoError(path + ":" + std::to_string(lineno) + ": segment '" +
                                  type + "' needs " + std::to_string(n) + " arguments");
                }
            };
            if (type == "straight") {
                need(2);
                spec.segments.push_back(Segment::straight(args[0], args[1], grade));
            } else if (type == "arc") {
                need(3);
                spec.segments.push_back(Segment::arc(args[0], args[1], args[2], grade));
            } else if (type == "stop") {
                need(1);
                spec.segments.push_back(Segment::stop(args[0]));
            } else if (type == "ramp") {
                need(3);
                spec.segments.push_back(Segment::ramp(args[0], args[1], args[2], grade));
            } else {
                throw IoError(path + ":" + std::to_string(lineno) + ": unknown segment type '" +
                              type + "'");
            }
        } else {
            throw IoError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    try {
        spec.validate();
    } catch (const std::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return spec;
}

ErrorSpec load_imu_grade(const std::string& path) {
    KeyValues kv = KeyValues::parse_file(path);
    ErrorSpec err;
    err.arw = dpsh_to_rpss(kv.get_double("imu.arw_dpsh", 0.0));
    err.vrw = mpsh_to_mpss(kv.get_double("imu.vrw_mpsh", 0.0));
    const Vec3 bg_dph = kv.get_vec3("imu.gyro_bias_dph", Vec3::Zero());
    err.gyro_bias = Vec3(dph_to_rps(bg_dph.x()), dph_to_rps(bg_dph.y()), dph_to_rps(bg_dph.z()));
    err.accel_bias = kv.get_vec3("imu.accel_bias_mps2", Vec3::Zero());
    err.gyro_scale = kv.get_vec3("imu.gyro_scale_ppm", Vec3::Zero()) * 1e-6;
    err.accel_scale = kv.get_vec3("imu.accel_scale_ppm", Vec3::Zero()) * 1e-6;
    err.gm_gyro_sigma = dph_to_rps(kv.get_double("imu.gm_gyro_sigma_dph", 0.0));
    err.gm_gyro_corr = kv.get_double("imu.gm_gyro_corr_s", 1800.0);
    err.gm_accel_sigma = kv.get_double("imu.gm_accel_sigma_mps2", 0.0);
    err.gm_accel_corr = kv.get_double("imu.gm_accel_corr_s", 1800.0);
    kv.require_all_consumed();
    return err;
}

SimGeometry load_sim_geometry(const std::string& path) {
    KeyValues kv = KeyValues::parse_file(path);
    SimGeometry g;
    g.geometry.wheel_radius = kv.get_double("geometry.wheel_radius", 0.3);
    g.geometry.lever_b = kv.get_vec3("geometry.lever_arm", Vec3::Zero());
    g.geometry.mounting_pitch = deg2rad(kv.get_double("geometry.mounting_pitch_deg", 0.0));
    g.geometry.mounting_yaw = deg2rad(kv.get_double("geometry.mounting_yaw_deg", 0.0));
    g.geometry.speed_sign = kv.get_double("geometry.speed_sign", 1.0);
    g.body_lever = kv.get_vec3("odo.lever_arm", g.body_lever);
    g.odo_rate_hz = kv.get_double("sim.odo_rate_hz", 20.0);
    g.odo_rmse = kv.get_double("sim.odo_rmse_mps", 0.03);
    kv.require_all_consumed();
    try {
        g.geometry.validate();
    } catch (const std::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return g;
}

}  // namespace wheelins
