#pragma once

// Control allocation for twin azimuthing stern thrusters.
//
// Underactuated controllers (transit, reverse) go through differential
// thrust with surge attenuation. The fully actuated station-keeping law goes
// through a weighted pseudoinverse on the extended thrust representation,
// followed by the azimuth feasibility logic of the +-45 deg pods.

#include "usv/model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace usv {

struct AllocatorConfig {
    double beta = 0.0;  // 1/(N m), surge attenuation rate
    Eigen::MatrixXd W;  // 2r x 2r, empty means identity
    double azimuth_limit = deg2rad(45.0);

    /// beta giving X' = fraction * X at |N| = n_max.
    static double beta_for(double fraction, double n_max) { return -std::log(fraction) / n_max; }
};

/// Per-thruster command: signed thrust (N) and azimuth (rad) from the body x axis.
struct ThrusterCommand {
    double thrust = 0.0;
    double azimuth = 0.0;
};

using ActuatorCommand = std::vector<ThrusterCommand>;

/// f = [Fx1, Fy1, ..., Fxr, Fyr].
using ExtendedThrust = Eigen::VectorXd;

inline double surge_attenuation(double X, double N, double beta) { return X * std::exp(-beta * std::abs(N)); }

struct DifferentialThrust {
    double port = 0.0;
    double starboard = 0.0;
};

/// Lateral arms (positive magnitudes) of the port and starboard thrusters.
inline std::pair<double, double> lateral_arms(const VehicleParams& p) {
    if (p.thrusters.size() != 2) throw ConfigError("differential allocation needs exactly two thrusters");
    const auto& a = p.thrusters[0];
    const auto& b = p.thrusters[1];
    const auto& port = a.ly < b.ly ? a : b;
    const auto& stbd = a.ly < b.ly ? b : a;
    return {-port.ly, stbd.ly};
}

/// Solves [1 1; lp -ls] [Tp Ts]' = [X' N]'. When either thrust exceeds
/// T_max both are scaled by the same factor, keeping the X'/N ratio.
inline DifferentialThrust alloc_differential(double X_prime, double N, double l_port, double l_stbd,
                                             double T_max) {
    const double span = l_port + l_stbd;
    if (span == 0.0) throw ConfigError("differential allocation: degenerate thruster geometry");
    DifferentialThrust out;
    out.port = (l_stbd * X_prime + N) / span;
    out.starboard = (l_port * X_prime - N) / span;
    const double peak = std::max(std::abs(out.port), std::abs(out.starboard));
    if (peak > T_max) {
        const double k = T_max / peak;
        out.port *= k;
        out.starboard *= k;
    }
    return out;
}

/// Forward map of the differential thrusters back to (X, N).
inline Vec2 differential_wrench(const DifferentialThrust& t, double l_port, double l_stbd) {
    return {t.port + t.starboard, l_port * t.port - l_stbd * t.starboard};
}

/// tau = T f with columns [1, 0, -ly]' and [0, 1, lx]' per thruster.
inline Eigen::MatrixXd extended_transform(const std::vector<ThrusterPos>& geometry) {
    if (geometry.empty()) throw ConfigError("extended_transform: no thrusters");
    const auto r = static_cast<Eigen::Index>(geometry.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(3, 2 * r);
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto& th = geometry[static_cast<std::size_t>(i)];
        T(0, 2 * i) = 1.0;
        T(2, 2 * i) = -th.ly;
        T(1, 2 * i + 1) = 1.0;
        T(2, 2 * i + 1) = th.lx;
    }
    return T;
}

/// W^-1 T' (T W^-1 T')^-1, the minimizer of f'Wf subject to T f = tau.
inline Eigen::MatrixXd weighted_pseudoinverse(const Eigen::MatrixXd& T, const Eigen::MatrixXd& W) {
    const Eigen::MatrixXd Winv = W.llt().solve(Eigen::MatrixXd::Identity(W.rows(), W.cols()));
    const Eigen::MatrixXd TWT = T * Winv * T.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(TWT);
    if (lu.rank() < TWT.rows()) throw AllocationSingular("weighted pseudoinverse: T W^-1 T' is rank deficient");
    return Winv * T.transpose() * lu.inverse();
}

/// Maps one thruster's requested force pair onto the pod's reachable set:
/// +-45 deg forward, the mirrored sector by reversing the propeller, and
/// zero thrust in the dead sectors.
inline ThrusterCommand azimuth_logic(double Fx, double Fy, double limit = deg2rad(45.0)) {
    constexpr double kTol = 1e-12;
    const double magnitude = std::hypot(Fx, Fy);
    if (magnitude == 0.0) return {};
    const double angle = std::atan2(Fy, Fx);
    if (std::abs(angle) <= limit + kTol) return {magnitude, angle};
    if (std::abs(angle) >= kPi - limit - kTol) {
        const double mirrored = angle > 0.0 ? angle - kPi : angle + kPi;
        return {-magnitude, mirrored};
    }
    return {};
}

/// Precomputed overactuated allocator for one geometry.
class OveractuatedAllocator {
public:
    OveractuatedAllocator() = default;

    OveractuatedAllocator(const VehicleParams& params, const AllocatorConfig& cfg)
        : T_(extended_transform(params.thrusters)), T_max_(params.T_max), limit_(cfg.azimuth_limit) {
        const Eigen::Index n = T_.cols();
        W_ = cfg.W.size() == 0 ? Eigen::MatrixXd::Identity(n, n) : cfg.W;
        if (W_.rows() != n || W_.cols() != n) throw ConfigError("allocation weight W must be 2r x 2r");
        if (!W_.isApprox(W_.transpose()) || W_.llt().info() != Eigen::Success) {
            throw ConfigError("allocation weight W must be symmetric positive definite");
        }
        Tw_ = weighted_pseudoinverse(T_, W_);
    }

    ExtendedThrust solve(const Vec3& tau) const { return Tw_ * tau; }

    ActuatorCommand allocate(const Vec3& tau) const {
        const ExtendedThrust f = solve(tau);
        ActuatorCommand out(static_cast<std::size_t>(f.size() / 2));
        for (std::size_t i = 0; i < out.size(); ++i) {
            const auto k = static_cast<Eigen::Index>(2 * i);
            ThrusterCommand c = azimuth_logic(f(k), f(k + 1), limit_);
            c.thrust = std::clamp(c.thrust, -T_max_, T_max_);
            out[i] = c;
        }
        return out;
    }

    const Eigen::MatrixXd& transform() const { return T_; }
    const Eigen::MatrixXd& pseudoinverse() const { return Tw_; }
    const Eigen::MatrixXd& weight() const { return W_; }

private:
    Eigen::MatrixXd T_;
    Eigen::MatrixXd W_;
    Eigen::MatrixXd Tw_;
    double T_max_ = 0.0;
    double limit_ = deg2rad(45.0);
};

inline ActuatorCommand alloc_overactuated(const Vec3& tau, const AllocatorConfig& cfg, const VehicleParams& params) {
    return OveractuatedAllocator(params, cfg).allocate(tau);
}

/// Extended thrust vector realized by a set of pod commands.
inline ExtendedThrust command_forces(const ActuatorCommand& cmd) {
    ExtendedThrust f(static_cast<Eigen::Index>(2 * cmd.size()));
    for (std::size_t i = 0; i < cmd.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(2 * i);
        f(k) = cmd[i].thrust * std::cos(cmd[i].azimuth);
        f(k + 1) = cmd[i].thrust * std::sin(cmd[i].azimuth);
    }
    return f;
}

/// Wrench the thrusters actually deliver for a set of commands.
inline Vec3 achieved_wrench(const ActuatorCommand& cmd, const std::vector<ThrusterPos>& geometry) {
    return extended_transform(geometry) * command_forces(cmd);
}

/// Differential-thrust path: attenuate surge, invert, saturate, and express
/// the result as zero-azimuth pod commands ordered like the geometry.
inline ActuatorCommand alloc_underactuated(const ControlOutput& out, const AllocatorConfig& cfg,
                                           const VehicleParams& params) {
    const auto [lp, ls] = lateral_arms(params);
    const double X = out.kill ? 0.0 : out.tau(0);
    const double Xp = surge_attenuation(X, out.tau(2), cfg.beta);
    const DifferentialThrust t = alloc_differential(Xp, out.tau(2), lp, ls, params.T_max);
    const bool first_is_port = params.thrusters[0].ly < params.thrusters[1].ly;
    ActuatorCommand cmd(2);
    cmd[0].thrust = first_is_port ? t.port : t.starboard;
    cmd[1].thrust = first_is_port ? t.starboard : t.port;
    return cmd;
}

enum class AllocationPath { Underactuated, Overactuated };

/// Both allocation paths bound to one vehicle; cheap to copy.
class Allocator {
public:
    Allocator() = default;
    Allocator(const VehicleParams& params, const AllocatorConfig& cfg)
        : params_(params), cfg_(cfg), over_(params, cfg) {}

    ActuatorCommand allocate(AllocationPath path, const ControlOutput& out) const {
        if (path == AllocationPath::Underactuated) return alloc_underactuated(out, cfg_, params_);
        ControlOutput o = out;
        if (o.kill) o.tau(0) = 0.0;
        return over_.allocate(o.tau);
    }

    Vec3 wrench(const ActuatorCommand& cmd) const { return over_.transform() * command_forces(cmd); }

    const AllocatorConfig& config() const { return cfg_; }
    const OveractuatedAllocator& overactuated() const { return over_; }

private:
    VehicleParams params_;
    AllocatorConfig cfg_;
    OveractuatedAllocator over_;
};

}  // namespace usv
