#include "wheelins/mechanization.hpp"

#include <cmath>
#include <stdexcept>

namespace wheelins {

ImuSample compensate(const ImuSample& in, const SensorErrors& err) {
    ImuSample out;
    out.t = in.t;
    out.gyro = (in.gyro - err.bg).cwiseQuotient(Vec3::Ones() + err.sg);
    out.accel = (in.accel - err.ba).cwiseQuotient(Vec3::Ones() + err.sa);
    return out;
}

NavState propagate(const NavState& nav, const ImuSample& prev, const ImuSample& curr,
                   double gravity) {
    const double dt = curr.t - prev.t;
    if (!(dt > 0.0)) {
        throw std::invalid_argument("propagate: non-increasing timestamps");
    }
    const Vec3 g_n(0.0, 0.0, gravity);
    const Vec3 dtheta = curr.gyro * dt;

    const Quat q_half = quat_from_rotvec(0.5 * dtheta);
    const Mat3 c_mid = (nav.att * q_half).toRotationMatrix();

    const Vec3 f_mean = 0.5 * (prev.accel + curr.accel);
    const Vec3 vel_new = nav.vel + (c_mid * f_mean + g_n) * dt;
    const Vec3 pos_new = nav.pos + 0.5 * (nav.vel + vel_new) * dt;

    NavState out;
    out.t = curr.t;
    out.pos = pos_new;
    out.vel = vel_new;
    out.att = (nav.att * quat_from_rotvec(dtheta)).normalized();
    return out;
}

StaticAlignment static_align(const std::vector<ImuSample>& window, double gravity) {
    if (window.empty()) {
        throw std::invalid_argument("static_align: empty window");
    }
    Vec3 f_sum = Vec3::Zero();
    Vec3 w_sum = Vec3::Zero();
    for (const auto& s : window) {
        f_sum += s.accel;
        w_sum += s.gyro;
    }
    const Vec3 f_mean = f_sum / static_cast<double>(window.size());
    const Vec3 w_mean = w_sum / static_cast<double>(window.size());

    if (std::abs(f_mean.norm() - gravity) > 0.2 * gravity) {
        throw std::runtime_error("static_align: mean specific force is not gravity-sized");
    }

    StaticAlignment out;
    out.roll = std::atan2(-f_mean.y(), -f_mean.z());
    out.pitch = std::atan2(f_mean.x(), std::sqrt(f_mean.y() * f_mean.y() +
                                                 f_mean.z() * f_mean.z()));
    out.gyro_bias = w_mean;
    out.mean_accel = f_mean;
    return out;
}

}  // namespace wheelins
