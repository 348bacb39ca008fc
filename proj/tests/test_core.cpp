#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "wheelins/core.hpp"

using namespace wheelins;

namespace {

Euler random_euler(std::mt19937_64& eng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return {u(eng) * kPi, u(eng) * (kPi / 2.0 - 0.05), u(eng) * kPi};
}

}  // namespace

TEST_CASE("normalize_angle wraps to (-pi, pi]") {
    CHECK(normalize_angle(3.0 * kPi / 2.0) == doctest::Approx(-kPi / 2.0));
    CHECK(normalize_angle(-kPi) == doctest::Approx(kPi));
    CHECK(normalize_angle(0.3) == doctest::Approx(0.3));
    CHECK(normalize_angle(kPi) == doctest::Approx(kPi));
    CHECK(normalize_angle(7.0 * kPi) == doctest::Approx(kPi));
    std::mt19937_64 eng(1);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = u(eng);
        const double n = normalize_angle(a);
        CHECK(n > -kPi - 1e-15);
        CHECK(n <= kPi + 1e-15);
        CHECK(std::abs(normalize_angle(n - a)) < 1e-9);
    }
}

TEST_CASE("euler_to_dcm identity and yaw-only values") {
    const Mat3 I = euler_to_dcm({0, 0, 0});
    CHECK((I - Mat3::Identity()).norm() < 1e-15);

    // yaw-only rotation at psi = pi/2
    const Mat3 C = euler_to_dcm({0, 0, kPi / 2.0});
    Mat3 expected;
    expected << 0, -1, 0,
                1, 0, 0,
                0, 0, 1;
    CHECK((C - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("euler_to_dcm produces rotations; round trip with dcm_to_euler") {
    std::mt19937_64 eng(7);
    for (int i = 0; i < 500; ++i) {
        const Euler e = random_euler(eng);
        const Mat3 C = euler_to_dcm(e);
        CHECK(is_rotation(C, 1e-9));
        const Euler back = dcm_to_euler(C);
        CHECK(back.roll == doctest::Approx(e.roll).epsilon(1e-12));
        CHECK(back.pitch == doctest::Approx(e.pitch).epsilon(1e-12));
        CHECK(back.yaw == doctest::Approx(e.yaw).epsilon(1e-12));
        CHECK((euler_to_dcm(back) - C).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("dcm_to_euler specific values") {
    const Euler id = dcm_to_euler(Mat3::Identity());
    CHECK(id.roll == doctest::Approx(0.0));
    CHECK(id.pitch == doctest::Approx(0.0));
    CHECK(id.yaw == doctest::Approx(0.0));

    const Euler e = dcm_to_euler(euler_to_dcm({0.1, -0.2, 2.0}));
    CHECK(e.roll == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(e.pitch == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(e.yaw == doctest::Approx(2.0).epsilon(1e-12));

    // pure roll by wt = pi/3 around the spin axis
    const double wt = kPi / 3.0;
    Mat3 spin;
    spin << 1, 0, 0,
            0, std::cos(wt), -std::sin(wt),
            0, std::sin(wt), std::cos(wt);
    const Euler r = dcm_to_euler(spin);
    CHECK(r.roll == doctest::Approx(wt).epsilon(1e-12));
    CHECK(r.pitch == doctest::Approx(0.0));
    CHECK(r.yaw == doctest::Approx(0.0));
}

TEST_CASE("singularities rejected") {
    CHECK_THROWS_AS(euler_to_dcm({0, kPi / 2.0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(euler_to_dcm({0, -kPi / 2.0, 0}), std::invalid_argument);
    Mat3 locked;
    locked << 0, 0, 1,
              0, 1, 0,
              -1, 0, 0;
    CHECK_THROWS_AS(dcm_to_euler(locked), std::invalid_argument);
}

TEST_CASE("skew values and cross-product identity") {
    CHECK(skew(Vec3::Zero()).norm() == 0.0);

    const double g = 9.80665;
    const Mat3 S = skew(Vec3(0, 0, -g));
    Mat3 expected;
    expected << 0, g, 0,
                -g, 0, 0,
                0, 0, 0;
    CHECK((S - expected).cwiseAbs().maxCoeff() == 0.0);

    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        const Vec3 v(u(eng), u(eng), u(eng));
        const Vec3 w(u(eng), u(eng), u(eng));
        CHECK((skew(v) * w - v.cross(w)).norm() < 1e-14);
        CHECK((skew(v) + skew(v).transpose()).norm() == 0.0);
        CHECK((skew(v) * w + skew(w) * v).norm() < 1e-14);
    }
}

TEST_CASE("exp/log SO3 round trips") {
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        Vec3 v(u(eng), u(eng), u(eng));
        v *= (i % 3 == 0) ? 1e-9 : 2.5;  // mix tiny and large angles
        if (v.norm() > kPi - 0.05) {
            v *= (kPi - 0.05) / v.norm();
        }
        const Mat3 C = exp_so3(v);
        CHECK(is_rotation(C, 1e-9));
        CHECK((log_so3(C) - v).norm() < 1e-9 * std::max(1.0, v.norm()));
        const Quat q = quat_from_rotvec(v);
        CHECK((q.toRotationMatrix() - C).cwiseAbs().maxCoeff() < 1e-12);
    }
    // near-pi branch
    const Vec3 big = (kPi - 1e-7) * Vec3(1, 2, -2).normalized();
    CHECK((log_so3(exp_so3(big)) - big).norm() < 1e-6);
}

TEST_CASE("heading_of matches yaw") {
    std::mt19937_64 eng(5);
    for (int i = 0; i < 100; ++i) {
        const Euler e = random_euler(eng);
        CHECK(normalize_angle(heading_of(euler_to_dcm(e)) - e.yaw) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }
}
