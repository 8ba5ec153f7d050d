#pragma once

// 3-DOF surface vessel maneuvering model: parameter set, the four model
// variants used by the plant and the controllers, and a fixed-step RK4
// integrator.

#include "usv/core.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <sstream>
#include <vector>

namespace usv {

/// Thruster position relative to the center of gravity, body frame (m).
/// Port thrusters have negative `ly`.
struct ThrusterPos {
    double lx = 0.0;
    double ly = 0.0;
};

/// Hydrodynamic coefficients in SNAME notation. Drag coefficients are
/// non-positive, added-mass derivatives are typically non-positive.
///
/// The defaults describe a generic 4.9 m, 180 kg catamaran with twin stern
/// azimuthing thrusters. They are non-authoritative and meant to be tuned.
struct VehicleParams {
    double m = 180.0;     // kg
    double I_z = 300.0;   // kg m^2
    double X_du = -12.0;  // kg
    double Y_dv = -100.0; // kg
    double Y_dr = -6.0;   // kg m
    double N_dv = -6.0;   // kg m
    double N_dr = -100.0; // kg m^2
    double X_u = -25.0;   // N s/m
    double X_uu = -12.0;  // N s^2/m^2
    double Y_v = -150.0;  // N s/m
    double Y_r = -8.0;    // N s
    double N_v = -8.0;    // N s
    double N_r = -250.0;  // N m s
    double X_u_rev = -50.0;  // N s/m, linear surge drag when going astern
    std::vector<ThrusterPos> thrusters{{-2.3, -0.9}, {-2.3, 0.9}};
    double N_max = 270.0;  // N m
    double T_max = 150.0;  // N per thruster

    double m11() const { return m - X_du; }
    double m22() const { return m - Y_dv; }
    double m33() const { return I_z - N_dr; }

    /// Throws ConfigError when an invariant is violated.
    void validate() const {
        auto fail = [](const std::string& what) { throw ConfigError("vehicle params: " + what); };
        if (!(m > 0.0) || !(I_z > 0.0)) fail("mass and yaw inertia must be positive");
        if (!(m11() > 0.0) || !(m22() > 0.0) || !(m33() > 0.0)) fail("effective inertias must be positive");
        for (double d : {X_u, X_uu, Y_v, N_r, X_u_rev}) {
            if (d > 0.0) fail("drag coefficients must be non-positive");
        }
        if (thrusters.empty()) fail("at least one thruster is required");
        for (const auto& th : thrusters) {
            if (th.ly == 0.0) fail("thruster lateral arm must be nonzero");
        }
        if (!(T_max > 0.0) || !(N_max > 0.0)) fail("actuator limits must be positive");
    }
};

enum class ModelKind { General, Transiting, StationKeeping, Reversing };

inline const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::General: return "general";
        case ModelKind::Transiting: return "transiting";
        case ModelKind::StationKeeping: return "station_keeping";
        case ModelKind::Reversing: return "reversing";
    }
    return "?";
}

/// J(psi): body-fixed velocity to NED rates.
inline Mat3 rotation(double psi) {
    const double c = std::cos(psi);
    const double s = std::sin(psi);
    Mat3 J;
    J << c, -s, 0.0,
         s, c, 0.0,
         0.0, 0.0, 1.0;
    return J;
}

inline Mat3 mass_matrix(const VehicleParams& p, ModelKind kind) {
    Mat3 M = Mat3::Zero();
    M(0, 0) = p.m11();
    M(1, 1) = p.m22();
    M(2, 2) = p.m33();
    if (kind == ModelKind::General) {
        M(1, 2) = -p.Y_dr;
        M(2, 1) = -p.N_dv;
    }
    return M;
}

inline Mat3 coriolis(const VehicleParams& p, ModelKind kind, const Vec3& nu) {
    const double u = nu(0);
    const double v = nu(1);
    const double r = nu(2);
    Mat3 C = Mat3::Zero();
    switch (kind) {
        case ModelKind::General: {
            const double c13 = -p.m22() * v + 0.5 * (p.Y_dr + p.N_dv) * r;
            const double c23 = p.m11() * u;
            C(0, 2) = c13;
            C(1, 2) = c23;
            C(2, 0) = -c13;
            C(2, 1) = -c23;
            break;
        }
        case ModelKind::Transiting:
            C(0, 2) = -p.m22() * v;
            C(1, 2) = p.m11() * u;
            break;
        case ModelKind::StationKeeping:
            C(0, 2) = -p.m22() * v;
            C(1, 2) = p.m11() * u;
            C(2, 0) = p.m22() * v;
            C(2, 1) = -p.m11() * u;
            break;
        case ModelKind::Reversing:
            break;
    }
    return C;
}

/// D(nu) with the leading minus folded in, so entries are >= 0 for SNAME
/// coefficients and -D(nu) nu is the drag force.
inline Mat3 damping(const VehicleParams& p, ModelKind kind, const Vec3& nu) {
    Mat3 D = Mat3::Zero();
    switch (kind) {
        case ModelKind::General:
            D(0, 0) = -(p.X_uu * std::abs(nu(0)) + p.X_u);
            D(1, 1) = -p.Y_v;
            D(1, 2) = -p.Y_r;
            D(2, 1) = -p.N_v;
            D(2, 2) = -p.N_r;
            break;
        case ModelKind::Transiting:
            D(0, 0) = -(p.X_uu * std::abs(nu(0)) + p.X_u);
            D(1, 1) = -p.Y_v;
            D(2, 2) = -p.N_r;
            break;
        case ModelKind::StationKeeping:
            D(0, 0) = -p.X_u;
            D(1, 1) = -p.Y_v;
            D(2, 2) = -p.N_r;
            break;
        case ModelKind::Reversing:
            D(0, 0) = -p.X_u_rev;
            D(1, 1) = -p.Y_v;
            D(2, 2) = -p.N_r;
            break;
    }
    return D;
}

/// Time derivative of the 6-vector [eta; nu].
struct StateDerivative {
    Vec3 eta_dot = Vec3::Zero();
    Vec3 nu_dot = Vec3::Zero();
};

inline StateDerivative dynamics(const VehicleParams& p, ModelKind kind, const VehicleState& s,
                                const Vec3& tau, const Vec3& disturbance_force = Vec3::Zero()) {
    const Vec3 nu = s.nu();
    const Mat3 M = mass_matrix(p, kind);
    const Vec3 rhs = tau + disturbance_force - coriolis(p, kind, nu) * nu - damping(p, kind, nu) * nu;
    StateDerivative d;
    d.eta_dot = rotation(s.psi) * nu;
    d.nu_dot = M.partialPivLu().solve(rhs);
    return d;
}

/// One classical RK4 step with tau and the disturbance held over the step.
inline VehicleState step(const VehicleParams& p, ModelKind kind, const VehicleState& s, const Vec3& tau,
                         const Vec3& disturbance_force, double dt) {
    if (!(dt > 0.0)) throw Error("step: dt must be positive");
    auto advance = [&](const VehicleState& base, const StateDerivative& d, double h) {
        return VehicleState::from(base.eta() + h * d.eta_dot, base.nu() + h * d.nu_dot, base.t + h);
    };
    const StateDerivative k1 = dynamics(p, kind, s, tau, disturbance_force);
    const StateDerivative k2 = dynamics(p, kind, advance(s, k1, 0.5 * dt), tau, disturbance_force);
    const StateDerivative k3 = dynamics(p, kind, advance(s, k2, 0.5 * dt), tau, disturbance_force);
    const StateDerivative k4 = dynamics(p, kind, advance(s, k3, dt), tau, disturbance_force);

    const Vec3 eta = s.eta() + dt / 6.0 * (k1.eta_dot + 2.0 * k2.eta_dot + 2.0 * k3.eta_dot + k4.eta_dot);
    const Vec3 nu = s.nu() + dt / 6.0 * (k1.nu_dot + 2.0 * k2.nu_dot + 2.0 * k3.nu_dot + k4.nu_dot);
    VehicleState out = VehicleState::from(eta, nu, s.t + dt);
    if (!out.finite()) {
        std::ostringstream msg;
        msg << "integration blowup at t=" << s.t << " (" << to_string(kind) << " model) with tau=["
            << tau(0) << ", " << tau(1) << ", " << tau(2) << "]";
        throw IntegrationBlowup(msg.str());
    }
    out.psi = wrap_angle(out.psi);
    return out;
}

// Environmental disturbance --------------------------------------------------

enum class DisturbanceMode { None, Constant, GaussMarkov };

struct DisturbanceConfig {
    DisturbanceMode mode = DisturbanceMode::GaussMarkov;
    Vec3 bias{2.0, 2.0, 0.5};            // N, N, N m (body frame)
    double correlation_time = 20.0;      // s
    Vec3 intensity{3.0, 3.0, 1.0};       // stationary std dev of the colored part
};

/// Body-frame force disturbance: constant bias plus an optional first-order
/// Gauss-Markov process. Carries its own RNG so a seed fully determines the
/// trace.
class Disturbance {
public:
    Disturbance() : Disturbance(DisturbanceConfig{DisturbanceMode::None, Vec3::Zero(), 1.0, Vec3::Zero()}, 0) {}

    Disturbance(const DisturbanceConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {
        if (cfg_.mode == DisturbanceMode::GaussMarkov && !(cfg_.correlation_time > 0.0)) {
            throw ConfigError("disturbance: correlation time must be positive");
        }
    }

    /// Force to apply over the next step of length dt; advances the process.
    Vec3 sample(double dt) {
        switch (cfg_.mode) {
            case DisturbanceMode::None:
                return Vec3::Zero();
            case DisturbanceMode::Constant:
                return cfg_.bias;
            case DisturbanceMode::GaussMarkov:
                break;
        }
        const Vec3 out = cfg_.bias + colored_;
        const double a = std::exp(-dt / cfg_.correlation_time);
        const double b = std::sqrt(1.0 - a * a);
        for (int i = 0; i < 3; ++i) {
            colored_(i) = a * colored_(i) + b * cfg_.intensity(i) * normal_(rng_);
        }
        return out;
    }

    const DisturbanceConfig& config() const { return cfg_; }

private:
    DisturbanceConfig cfg_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    Vec3 colored_ = Vec3::Zero();
};

}  // namespace usv
