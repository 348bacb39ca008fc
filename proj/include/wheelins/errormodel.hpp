#pragma once

#include <utility>

#include "wheelins/core.hpp"

namespace wheelins {

// Error-state dimension variants. 15-state drops the scale-factor blocks,
// 9-state drops all sensor-error blocks.
enum class DimMode : int {
    Full21 = 21,
    NoScale15 = 15,
    PvaOnly9 = 9,
};

DimMode dim_mode_from_int(int dim);

// Block bookkeeping for a given mode. Error-state order:
// [dr(3), dv(3), phi(3), bg(3), ba(3), sg(3), sa(3)], absent blocks removed.
// Noise order: [w_g(3), w_a(3), w_bg(3), w_ba(3), w_sg(3), w_sa(3)].
struct StateLayout {
    DimMode mode{DimMode::Full21};
    int dim{21};
    int noise_dim{18};
    bool has_bias{true};
    bool has_scale{true};

    static constexpr int kPos = 0;
    static constexpr int kVel = 3;
    static constexpr int kPhi = 6;
    static constexpr int kBg = 9;
    static constexpr int kBa = 12;
    static constexpr int kSg = 15;
    static constexpr int kSa = 18;

    static constexpr int kWg = 0;
    static constexpr int kWa = 3;
    static constexpr int kWbg = 6;
    static constexpr int kWba = 9;
    static constexpr int kWsg = 12;
    static constexpr int kWsa = 15;

    static StateLayout make(DimMode m);
};

// Matrices sized at run time but bounded at 21/18 so they live on the stack.
using StateMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 21, 21>;
using StateNoiseMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 21, 18>;
using NoiseMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 18, 18>;
using StateVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 21, 1>;

// First-order Gauss-Markov blocks: correlation times (s) and driving-noise
// PSD per axis (unit^2/s). For a stationary process of std sigma,
// q = 2*sigma^2/T.
struct GmParams {
    double t_bg{3600.0};
    double t_ba{3600.0};
    double t_sg{3600.0};
    double t_sa{3600.0};
    Vec3 q_bg{Vec3::Zero()};
    Vec3 q_ba{Vec3::Zero()};
    Vec3 q_sg{Vec3::Zero()};
    Vec3 q_sa{Vec3::Zero()};

    static Vec3 psd_from_sigma(double sigma, double corr_time) {
        return Vec3::Constant(2.0 * sigma * sigma / corr_time);
    }
};

// White-noise densities plus the Gauss-Markov parameters.
// arw in rad/sqrt(s), vrw in m/s/sqrt(s).
struct NoisePsd {
    double arw{dpsh_to_rpss(0.24)};
    double vrw{mpsh_to_mpss(3.0)};
    GmParams gm;

    static NoisePsd defaults();
};

// Continuous-time error dynamics F(t). Blocks:
//   F[dr,dv] = I, F[dv,phi] = skew(C f_b), F[dv,ba] = C, F[dv,sa] = C diag(f_b),
//   F[phi,bg] = -C, F[phi,sg] = -C diag(omega_b), -1/T on each GM diagonal.
StateMat build_F(const Mat3& c_bn, const Vec3& f_b, const Vec3& omega_b,
                 const GmParams& gm, DimMode mode);

// Noise distribution G(t): accelerometer white noise drives dv through C,
// gyro white noise drives phi through -C, identities route the GM noises.
StateNoiseMat build_G(const Mat3& c_bn, DimMode mode);

// Diagonal PSD matrix matching the noise layout of build_G.
NoiseMat noise_psd_matrix(const NoisePsd& n, DimMode mode);

// exp(-dt/T) of the discrete Gauss-Markov recursion.
double gm_discrete_factor(double corr_time, double dt);

// First-order transition Phi = I + F dt and trapezoidal
// Qd = (Phi G Q G' Phi' + G Q G') dt / 2. Requires 0 < dt <= 0.05 s.
std::pair<StateMat, StateMat> discretize(const StateMat& F, const StateNoiseMat& G,
                                         const NoiseMat& Q, double dt);

// Filter-side error state: mean (zero in closed-loop operation) + covariance.
struct ErrorState {
    StateLayout layout;
    StateVec dx;
    StateMat P;

    explicit ErrorState(DimMode mode = DimMode::Full21)
        : layout(StateLayout::make(mode)),
          dx(StateVec::Zero(layout.dim)),
          P(StateMat::Zero(layout.dim, layout.dim)) {}
};

}  // namespace wheelins
