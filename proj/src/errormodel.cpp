#include "wheelins/errormodel.hpp"

#include <cmath>
#include <stdexcept>

namespace wheelins {

DimMode dim_mode_from_int(int dim) {
    switch (dim) {
        case 21: return DimMode::Full21;
        case 15: return DimMode::NoScale15;
        case 9: return DimMode::PvaOnly9;
        default: throw std::invalid_argument("state dimension must be 21, 15 or 9");
    }
}

StateLayout StateLayout::make(DimMode m) {
    StateLayout l;
    l.mode = m;
    switch (m) {
        case DimMode::Full21:
            l.dim = 21; l.noise_dim = 18; l.has_bias = true; l.has_scale = true;
            break;
        case DimMode::NoScale15:
            l.dim = 15; l.noise_dim = 12; l.has_bias = true; l.has_scale = false;
            break;
        case DimMode::PvaOnly9:
            l.dim = 9; l.noise_dim = 6; l.has_bias = false; l.has_scale = false;
            break;
    }
    return l;
}

NoisePsd NoisePsd::defaults() {
    NoisePsd n;
    n.gm.q_bg = GmParams::psd_from_sigma(dph_to_rps(200.0), n.gm.t_bg);
    n.gm.q_ba = GmParams::psd_from_sigma(0.01, n.gm.t_ba);
    n.gm.q_sg = GmParams::psd_from_sigma(ppm(1000.0), n.gm.t_sg);
    n.gm.q_sa = GmParams::psd_from_sigma(ppm(1000.0), n.gm.t_sa);
    return n;
}

StateMat build_F(const Mat3& c_bn, const Vec3& f_b, const Vec3& omega_b,
                 const GmParams& gm, DimMode mode) {
    const StateLayout l = StateLayout::make(mode);
    StateMat F = StateMat::Zero(l.dim, l.dim);

    F.block<3, 3>(StateLayout::kPos, StateLayout::kVel) = Mat3::Identity();
    F.block<3, 3>(StateLayout::kVel, StateLayout::kPhi) = skew(c_bn * f_b);
    if (l.has_bias) {
        F.block<3, 3>(StateLayout::kVel, StateLayout::kBa) = c_bn;
        F.block<3, 3>(StateLayout::kPhi, StateLayout::kBg) = -c_bn;
        F.block<3, 3>(StateLayout::kBg, StateLayout::kBg) = -Mat3::Identity() / gm.t_bg;
        F.block<3, 3>(StateLayout::kBa, StateLayout::kBa) = -Mat3::Identity() / gm.t_ba;
    }
    if (l.has_scale) {
        F.block<3, 3>(StateLayout::kVel, StateLayout::kSa) = c_bn * f_b.asDiagonal();
        F.block<3, 3>(StateLayout::kPhi, StateLayout::kSg) = -c_bn * omega_b.asDiagonal();
        F.block<3, 3>(StateLayout::kSg, StateLayout::kSg) = -Mat3::Identity() / gm.t_sg;
        F.block<3, 3>(StateLayout::kSa, StateLayout::kSa) = -Mat3::Identity() / gm.t_sa;
    }
    return F;
}

StateNoiseMat build_G(const Mat3& c_bn, DimMode mode) {
    const StateLayout l = StateLayout::make(mode);
    StateNoiseMat G = StateNoiseMat::Zero(l.dim, l.noise_dim);
    G.block<3, 3>(StateLayout::kVel, StateLayout::kWa) = c_bn;
    G.block<3, 3>(StateLayout::kPhi, StateLayout::kWg) = -c_bn;
    if (l.has_bias) {
        G.block<3, 3>(StateLayout::kBg, StateLayout::kWbg) = Mat3::Identity();
        G.block<3, 3>(StateLayout::kBa, StateLayout::kWba) = Mat3::Identity();
    }
    if (l.has_scale) {
        G.block<3, 3>(StateLayout::kSg, StateLayout::kWsg) = Mat3::Identity();
        G.block<3, 3>(StateLayout::kSa, StateLayout::kWsa) = Mat3::Identity();
    }
    return G;
}

NoiseMat noise_psd_matrix(const NoisePsd& n, DimMode mode) {
    const StateLayout l = StateLayout::make(mode);
    NoiseMat Q = NoiseMat::Zero(l.noise_dim, l.noise_dim);
    Q.diagonal().segment<3>(StateLayout::kWg).setConstant(n.arw * n.arw);
    Q.diagonal().segment<3>(StateLayout::kWa).setConstant(n.vrw * n.vrw);
    if (l.has_bias) {
        Q.diagonal().segment<3>(StateLayout::kWbg) = n.gm.q_bg;
        Q.diagonal().segment<3>(StateLayout::kWba) = n.gm.q_ba;
    }
    if (l.has_scale) {
        Q.diagonal().segment<3>(StateLayout::kWsg) = n.gm.q_sg;
        Q.diagonal().segment<3>(StateLayout::kWsa) = n.gm.q_sa;
    }
    return Q;
}

double gm_discrete_factor(double corr_time, double dt) {
    if (!(corr_time > 0.0) || dt < 0.0) {
        throw std::invalid_argument("gm_discrete_factor: need T > 0 and dt >= 0");
    }
    return std::exp(-dt / corr_time);
}

std::pair<StateMat, StateMat> discretize(const StateMat& F, const StateNoiseMat& G,
                                         const NoiseMat& Q, double dt) {
    if (!(dt > 0.0) || dt > 0.05) {
        throw std::invalid_argument("discretize: dt outside (0, 0.05] s");
    }
    StateMat Phi = StateMat::Identity(F.rows(), F.cols()) + F * dt;
    StateMat gqg = G * Q * G.transpose();
    StateMat Qd = 0.5 * dt * (Phi * gqg * Phi.transpose() + gqg);
    Qd = 0.5 * (Qd + Qd.transpose()).eval();
    return {std::move(Phi), std::move(Qd)};
}

}  // namespace wheelins
