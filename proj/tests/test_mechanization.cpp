#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "wheelins/mechanization.hpp"

using namespace wheelins;

namespace {
constexpr double kG = kDefaultGravity;

std::vector<ImuSample> static_stream(double duration, double rate, const Vec3& gyro,
                                     const Vec3& accel) {
    std::vector<ImuSample> out;
    const double dt = 1.0 / rate;
    for (double t = 0.0; t <= duration + 1e-12; t += dt) {
        out.push_back({t, gyro, accel});
    }
    return out;
}
}  // namespace

TEST_CASE("compensate inverts the sensor error model") {
    ImuSample s;
    s.t = 1.0;
    s.gyro = Vec3(1.001, 0, 0);
    s.accel = Vec3(0, 0, -kG);

    SUBCASE("zero errors are a no-op") {
        const ImuSample out = compensate(s, SensorErrors{});
        CHECK((out.gyro - s.gyro).norm() == 0.0);
        CHECK((out.accel - s.accel).norm() == 0.0);
    }
    SUBCASE("scale-only inversion") {
        SensorErrors err;
        err.sg = Vec3(0.001, 0, 0);
        const ImuSample out = compensate(s, err);
        CHECK(out.gyro.x() == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("corrupt-then-compensate round trip") {
        SensorErrors err;
        err.bg = Vec3(0.01, -0.02, 0.005);
        err.ba = Vec3(0.1, 0.05, -0.02);
        err.sg = Vec3(0.001, -0.002, 0.0005);
        err.sa = Vec3(-0.0015, 0.001, 0.002);
        ImuSample corrupted;
        corrupted.t = s.t;
        corrupted.gyro = (Vec3::Ones() + err.sg).cwiseProduct(s.gyro) + err.bg;
        corrupted.accel = (Vec3::Ones() + err.sa).cwiseProduct(s.accel) + err.ba;
        const ImuSample out = compensate(corrupted, err);
        CHECK((out.gyro - s.gyro).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((out.accel - s.accel).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("propagate: static equilibrium leaves the state fixed") {
    NavState nav;
    nav.t = 0.0;
    ImuSample prev{0.0, Vec3::Zero(), Vec3(0, 0, -kG)};
    ImuSample curr{0.005, Vec3::Zero(), Vec3(0, 0, -kG)};
    const NavState out = propagate(nav, prev, curr, kG);
    CHECK(out.t == doctest::Approx(0.005));
    CHECK(out.pos.norm() < 1e-15);
    CHECK(out.vel.norm() < 1e-15);
    CHECK(out.att.angularDistance(nav.att) < 1e-15);
}

TEST_CASE("propagate: zero-input invariance holds for any attitude") {
    std::mt19937_64 eng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        NavState nav;
        nav.att = quat_from_rotvec(Vec3(u(eng), u(eng), u(eng)));
        nav.pos = Vec3(u(eng), u(eng), u(eng));
        const Vec3 f_b = nav.dcm().transpose() * Vec3(0, 0, -kG);
        NavState next = nav;
        for (int k = 0; k < 100; ++k) {
            ImuSample prev{k * 0.005, Vec3::Zero(), f_b};
            ImuSample curr{(k + 1) * 0.005, Vec3::Zero(), f_b};
            next = propagate(next, prev, curr, kG);
        }
        CHECK((next.pos - nav.pos).norm() < 1e-10);
        CHECK(next.vel.norm() < 1e-10);
        CHECK(next.att.angularDistance(nav.att) < 1e-12);
    }
}

TEST_CASE("propagate: constant spin about x for 1 s gives roll = pi") {
    NavState nav;
    const Vec3 gyro(kPi, 0, 0);
    const double dt = 0.005;
    NavState cur = nav;
    for (int k = 0; k < 200; ++k) {
        // specific force follows the rotating body frame so velocity stays put
        const Quat q_prev = cur.att;
        ImuSample prev{k * dt, gyro, q_prev.toRotationMatrix().transpose() * Vec3(0, 0, -kG)};
        const Quat q_next = q_prev * quat_from_rotvec(gyro * dt);
        ImuSample curr{(k + 1) * dt, gyro,
                       q_next.toRotationMatrix().transpose() * Vec3(0, 0, -kG)};
        cur = propagate(cur, prev, curr, kG);
    }
    const Mat3 expected = exp_so3(Vec3(kPi, 0, 0));
    CHECK((cur.dcm() - expected).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(cur.vel.norm() < 2e-2);  // residual from trapezoid vs rotating force
}

TEST_CASE("propagate: constant forward force integrates analytically") {
    NavState nav;
    const Vec3 f(1.0, 0, -kG);
    NavState cur = nav;
    const double dt = 0.005;
    for (int k = 0; k < 2000; ++k) {
        ImuSample prev{k * dt, Vec3::Zero(), f};
        ImuSample curr{(k + 1) * dt, Vec3::Zero(), f};
        cur = propagate(cur, prev, curr, kG);
    }
    CHECK(cur.vel.x() == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(cur.pos.x() == doctest::Approx(50.0).epsilon(1e-3));
    CHECK(std::abs(cur.pos.y()) < 1e-9);
    CHECK(std::abs(cur.vel.z()) < 1e-9);
}

TEST_CASE("propagate: attitude norm preserved over many steps") {
    NavState cur;
    std::mt19937_64 eng(4);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 5000; ++k) {
        ImuSample prev{k * 0.005, Vec3(u(eng), u(eng), u(eng)), Vec3(u(eng), u(eng), u(eng))};
        ImuSample curr{(k + 1) * 0.005, Vec3(u(eng), u(eng), u(eng)),
                       Vec3(u(eng), u(eng), u(eng))};
        cur = propagate(cur, prev, curr, kG);
        CHECK(std::abs(cur.att.norm() - 1.0) < 1e-9);
    }
}

TEST_CASE("propagate rejects non-increasing timestamps") {
    NavState nav;
    ImuSample prev{1.0, Vec3::Zero(), Vec3::Zero()};
    ImuSample curr{1.0, Vec3::Zero(), Vec3::Zero()};
    CHECK_THROWS_AS(propagate(nav, prev, curr, kG), std::invalid_argument);
}

TEST_CASE("static_align examples") {
    SUBCASE("level static") {
        const auto a = static_align(static_stream(1.0, 200, Vec3::Zero(), Vec3(0, 0, -kG)), kG);
        CHECK(a.roll == doctest::Approx(0.0));
        CHECK(a.pitch == doctest::Approx(0.0));
        CHECK(a.gyro_bias.norm() == 0.0);
    }
    SUBCASE("pure roll tilt") {
        const Vec3 f(0, -kG * std::sin(0.1), -kG * std::cos(0.1));
        const auto a = static_align(static_stream(1.0, 200, Vec3::Zero(), f), kG);
        CHECK(a.roll == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(a.pitch == doctest::Approx(0.0));
    }
    SUBCASE("gyro bias recovered exactly on noiseless data") {
        const Vec3 bias(0.001, -0.002, 0.0005);
        const auto a = static_align(static_stream(2.0, 200, bias, Vec3(0, 0, -kG)), kG);
        CHECK((a.gyro_bias - bias).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("non-gravity window rejected") {
        CHECK_THROWS(static_align(static_stream(1.0, 200, Vec3::Zero(), Vec3(5, 0, -2)), kG));
        CHECK_THROWS(static_align({}, kG));
    }
}
