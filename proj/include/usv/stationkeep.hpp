#pragma once

// Fully actuated MIMO backstepping setpoint regulator (full pose).

#include "usv/model.hpp"
#include "usv/trajectory.hpp"

#include <optional>

namespace usv {

struct StationKeepGains {
    Mat3 Lambda = Vec3(0.2, 0.2, 0.2).asDiagonal();    // 1/s
    Mat3 K_p = Vec3(40.0, 40.0, 300.0).asDiagonal();
    Mat3 K_d = Vec3(400.0, 400.0, 300.0).asDiagonal();

    void validate() const {
        for (const Mat3* K : {&Lambda, &K_p, &K_d}) {
            Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (*K + K->transpose()));
            if (!(es.eigenvalues().minCoeff() > 0.0)) {
                throw ConfigError("station-keeping gains must be positive definite");
            }
        }
    }
};

/// eta - eta_d with the heading component wrapped.
inline Vec3 pose_error(const Vec3& eta, const Vec3& eta_d) {
    Vec3 e = eta - eta_d;
    e(2) = wrap_angle(e(2));
    return e;
}

struct VirtualRefs {
    Vec3 etar_dot = Vec3::Zero();
    Vec3 nu_r = Vec3::Zero();
};

inline VirtualRefs virtual_refs(const Vec3& eta, const Vec3& eta_d, const Vec3& etad_dot, const Mat3& Lambda,
                                double psi) {
    VirtualRefs out;
    out.etar_dot = etad_dot - Lambda * pose_error(eta, eta_d);
    out.nu_r = rotation(psi).transpose() * out.etar_dot;  // J^-1 = J' for the planar rotation
    return out;
}

/// s = eta_dot - etar_dot
inline Vec3 tracking_surface(const Vec3& eta_dot, const Vec3& etar_dot) { return eta_dot - etar_dot; }

/// Station-keeping law. Setpoints are fed with eta_d_dot = 0, and nu_r_dot
/// comes from a backward difference against `prev_nu_r` (zero when absent).
inline ControlOutput sk_control(const VehicleParams& params, const StationKeepGains& gains, const VehicleState& s,
                                const Vec3& eta_d, const std::optional<Vec3>& prev_nu_r, double dt,
                                Vec3* nu_r_out = nullptr) {
    const Vec3 eta = s.eta();
    const Vec3 nu = s.nu();
    const Mat3 J = rotation(s.psi);
    const Vec3 eta_t = pose_error(eta, eta_d);
    const VirtualRefs refs = virtual_refs(eta, eta_d, Vec3::Zero(), gains.Lambda, s.psi);
    const Vec3 sv = tracking_surface(J * nu, refs.etar_dot);
    Vec3 nu_r_dot = Vec3::Zero();
    if (prev_nu_r && dt > 0.0) nu_r_dot = (refs.nu_r - *prev_nu_r) / dt;

    const ModelKind kind = ModelKind::StationKeeping;
    ControlOutput out;
    out.tau = mass_matrix(params, kind) * nu_r_dot + coriolis(params, kind, nu) * refs.nu_r +
              damping(params, kind, nu) * refs.nu_r - J.transpose() * gains.K_d * sv -
              J.transpose() * gains.K_p * eta_t;
    if (nu_r_out) *nu_r_out = refs.nu_r;
    return out;
}

class StationKeepController {
public:
    StationKeepController() = default;
    StationKeepController(VehicleParams params, StationKeepGains gains) : params_(std::move(params)), gains_(gains) {}

    ControlOutput compute(const VehicleState& s, const SampleView& ref, double dt) {
        Vec3 nu_r;
        ControlOutput out = sk_control(params_, gains_, s, ref.current.eta, prev_nu_r_, dt, &nu_r);
        prev_nu_r_ = nu_r;
        return out;
    }

    void reset() { prev_nu_r_.reset(); }
    const StationKeepGains& gains() const { return gains_; }

private:
    VehicleParams params_;
    StationKeepGains gains_;
    std::optional<Vec3> prev_nu_r_;
};

}  // namespace usv
