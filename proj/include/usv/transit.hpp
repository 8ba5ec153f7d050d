#pragma once

// Underactuated backstepping position-tracking controller. Drives the
// body-frame position error into a neighborhood set by delta using surge
// force and yaw torque only.

#include "usv/model.hpp"
#include "usv/trajectory.hpp"

#include <algorithm>
#include <optional>

namespace usv {

struct TransitGains {
    Mat2 K_e = Vec2(300.0, 300.0).asDiagonal();
    Mat2 K_phi = Vec2(1.0, 1.0).asDiagonal();
    double K_z2 = 10.0;
    Vec2 delta{-0.2, 0.0};  // m; delta1 < 0 tracks bow-first
    Vec2 g{1.0, 0.0};
    double N_clamp = 270.0;  // N m
    double coupling_scale = 0.01;  // weight on the phi/z2 cross term of the yaw law

    void validate() const {
        auto spd = [](const Mat2& K) {
            Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (K + K.transpose()));
            return es.eigenvalues().minCoeff() > 0.0;
        };
        if (!spd(K_e) || !spd(K_phi)) throw ConfigError("transit gains: K_e and K_phi must be positive definite");
        if (!(K_z2 > 0.0)) throw ConfigError("transit gains: K_z2 must be positive");
        if (delta(0) == 0.0 || delta(1) < 0.0) throw ConfigError("transit gains: need delta1 != 0, delta2 >= 0");
        if (!(coupling_scale > 0.0)) throw ConfigError("transit gains: coupling_scale must be positive");
        if (!(N_clamp > 0.0)) throw ConfigError("transit gains: N_clamp must be positive");
    }
};

inline Mat2 rotation2(double psi) {
    const double c = std::cos(psi);
    const double s = std::sin(psi);
    Mat2 R;
    R << c, -s, s, c;
    return R;
}

/// Surge/sway inertia submatrix m = diag(m - X_du, m - Y_dv).
inline Mat2 transit_inertia(const VehicleParams& p) { return Vec2(p.m11(), p.m22()).asDiagonal(); }

/// Surge/sway drag submatrix in SNAME sign, d_v = diag(X_uu|u| + X_u, Y_v).
inline Mat2 transit_drag(const VehicleParams& p, double u) {
    return Vec2(p.X_uu * std::abs(u) + p.X_u, p.Y_v).asDiagonal();
}

/// p_t = R(psi)' (p - p_d)
inline Vec2 position_error(const Vec2& p, const Vec2& p_d, double psi) {
    return rotation2(psi).transpose() * (p - p_d);
}

inline Mat2 ball_matrix(const VehicleParams& params, const Vec2& delta) {
    if (delta(0) == 0.0) throw SingularNeighborhood("ball matrix: delta1 must be nonzero");
    Mat2 B;
    B << 1.0, params.m22() * delta(1),
         0.0, -params.m11() * delta(0);
    return B;
}

struct BackstepVars {
    Vec2 z1 = Vec2::Zero();
    Vec2 phi = Vec2::Zero();
};

inline BackstepVars backstep_vars(const VehicleParams& params, const TransitGains& gains, const VehicleState& s,
                                  const Vec2& p_d, const Vec2& pd_dot) {
    const Mat2 m = transit_inertia(params);
    const Vec2 p_t = position_error(s.position(), p_d, s.psi);
    const Vec2 nu2(s.u, s.v);
    BackstepVars out;
    out.z1 = nu2 - rotation2(s.psi).transpose() * pd_dot + m.inverse() * gains.K_e * p_t;
    out.phi = out.z1 - gains.delta;
    return out;
}

/// The h term of the stabilizing function.
inline Vec2 stabilizer_h(const VehicleParams& params, const TransitGains& gains, const VehicleState& s,
                         const Vec2& p_d, const Vec2& pd_dot, const Vec2& pd_ddot) {
    const Mat2 m = transit_inertia(params);
    const Mat2 m_inv = m.inverse();
    const Mat2 d_v = transit_drag(params, s.u);
    const Mat2 Rt = rotation2(s.psi).transpose();
    const Vec2 p_t = position_error(s.position(), p_d, s.psi);
    const BackstepVars bv = backstep_vars(params, gains, s, p_d, pd_dot);
    const Mat2& K_e = gains.K_e;
    return d_v * Rt * pd_dot - K_e * d_v * m_inv * p_t - m * Rt * pd_ddot + K_e * bv.z1 - K_e * K_e * m_inv * p_t;
}

/// alpha = [X_desired, r_desired].
inline Vec2 stabilizer(const VehicleParams& params, const TransitGains& gains, const VehicleState& s,
                       const Vec2& p_d, const Vec2& pd_dot, const Vec2& pd_ddot) {
    const Mat2 B = ball_matrix(params, gains.delta);
    const Mat2 m_inv = transit_inertia(params).inverse();
    const Mat2 d_v = transit_drag(params, s.u);
    const Vec2 p_t = position_error(s.position(), p_d, s.psi);
    const BackstepVars bv = backstep_vars(params, gains, s, p_d, pd_dot);
    const Vec2 h = stabilizer_h(params, gains, s, p_d, pd_dot, pd_ddot);
    const Vec2 rhs = h + d_v * gains.delta + m_inv * p_t + gains.K_phi * m_inv * bv.phi;
    return -B.inverse() * rhs;
}

/// Unclamped yaw torque of the transit law.
inline double transit_yaw_torque(const VehicleParams& params, const TransitGains& gains, const VehicleState& s,
                                 const Vec2& phi, const Vec2& alpha, const Vec2& alpha_dot) {
    const Vec2 B_b = ball_matrix(params, gains.delta).col(1);
    const double z2 = s.r - alpha(1);
    return -gains.coupling_scale * phi.dot(transit_inertia(params) * B_b) - params.N_r * alpha(1) +
           params.m33() * alpha_dot(1) - gains.K_z2 * z2;
}

/// Pure transit law; `prev_alpha` is alpha from the previous control step
/// (empty on the first step, giving alpha_dot = 0).
inline ControlOutput transit_control(const VehicleParams& params, const TransitGains& gains, const VehicleState& s,
                                     const TrajectorySample& ref, const std::optional<Vec2>& prev_alpha, double dt,
                                     Vec2* alpha_out = nullptr) {
    const Vec2 p_d = ref.eta.head<2>();
    const Vec2 pd_dot = ref.eta_dot.head<2>();
    const Vec2 pd_ddot = ref.eta_ddot.head<2>();
    const Vec2 alpha = stabilizer(params, gains, s, p_d, pd_dot, pd_ddot);
    Vec2 alpha_dot = Vec2::Zero();
    if (prev_alpha && dt > 0.0) {
        alpha_dot = (alpha - *prev_alpha) / dt;
        if (!alpha_dot.allFinite()) alpha_dot.setZero();
    }
    const BackstepVars bv = backstep_vars(params, gains, s, p_d, pd_dot);
    const double N = transit_yaw_torque(params, gains, s, bv.phi, alpha, alpha_dot);

    ControlOutput out;
    out.tau(0) = gains.g.dot(alpha);
    out.tau(1) = 0.0;
    out.tau(2) = std::clamp(N, -gains.N_clamp, gains.N_clamp);
    if (alpha_out) *alpha_out = alpha;
    return out;
}

/// Stateful wrapper holding one step of alpha history.
class TransitController {
public:
    TransitController() = default;
    TransitController(VehicleParams params, TransitGains gains) : params_(std::move(params)), gains_(gains) {}

    ControlOutput compute(const VehicleState& s, const SampleView& ref, double dt) {
        Vec2 alpha;
        ControlOutput out = transit_control(params_, gains_, s, ref.current, prev_alpha_, dt, &alpha);
        prev_alpha_ = alpha;
        return out;
    }

    void reset() { prev_alpha_.reset(); }
    const TransitGains& gains() const { return gains_; }

private:
    VehicleParams params_;
    TransitGains gains_;
    std::optional<Vec2> prev_alpha_;
};

}  // namespace usv
