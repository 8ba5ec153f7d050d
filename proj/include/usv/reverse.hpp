#pragma once

// Sternward behavior: LOS guidance toward the next trajectory pose feeding a
// proportional heading loop and an anti-windup PI surge-speed loop.

#include "usv/model.hpp"
#include "usv/trajectory.hpp"

#include <algorithm>
#include <utility>

namespace usv {

struct ReverseGains {
    double k_psi = 800.0;  // N m / rad
    double k_pu = 300.0;   // N s / m
    double k_iu = 60.0;    // N / m
    double alpha_min = 0.5;
    double alpha_max = 1.5;
    double R_min = 2.0;      // m
    double u_rev_max = 1.0;  // m/s

    void validate() const {
        if (!(k_psi > 0.0) || !(k_pu > 0.0) || !(k_iu > 0.0)) throw ConfigError("reverse gains must be positive");
        if (!(alpha_min > 0.0 && alpha_min < 1.0 && alpha_max > 1.0)) {
            throw ConfigError("reverse gains: need 0 < alpha_min < 1 < alpha_max");
        }
        if (!(R_min > 0.0)) throw ConfigError("reverse gains: R_min must be positive");
        if (!(u_rev_max > 0.0)) throw ConfigError("reverse gains: u_rev_max must be positive");
    }
};

/// Integral of the surge error since the speed last entered the margin.
struct AntiWindupState {
    double integral = 0.0;  // m
    bool inside = false;
    double entered_at = 0.0;  // s
};

struct LosDistances {
    double r_t = 0.0;
    double l = 0.0;
};

inline LosDistances los_distances(const Vec2& p, const Vec2& p_d_next, double R_min) {
    const double r_t = (p - p_d_next).norm();
    return {r_t, r_t - R_min};
}

/// Outside R_min the bow points away from the waypoint so the stern faces it.
inline double los_heading(const Vec2& p, const Vec2& p_d_next, double psi_d_next, double l) {
    if (l >= 0.0) return std::atan2(p.y() - p_d_next.y(), p.x() - p_d_next.x());
    return psi_d_next;
}

struct LosSpeed {
    double u = 0.0;  // m/s, <= 0
    bool kill = false;
};

inline LosSpeed los_speed(double l, double t, double t_next, double u_rev_max) {
    if (l < 0.0) return {0.0, true};
    const double horizon = t - t_next;
    if (horizon == 0.0) return {-u_rev_max, false};
    return {std::clamp(l / horizon, -u_rev_max, 0.0), false};
}

inline double heading_p(double psi, double psi_los, double k_psi) { return -k_psi * wrap_angle(psi - psi_los); }

inline AntiWindupState antiwindup_update(AntiWindupState st, double u, double u_los, double t, double dt,
                                         double alpha_min, double alpha_max) {
    const double mag = std::abs(u);
    const double ref = std::abs(u_los);
    if (alpha_min * ref <= mag && mag <= alpha_max * ref) {
        if (!st.inside) {
            st.inside = true;
            st.integral = 0.0;
            st.entered_at = t;
        }
        st.integral += (u - u_los) * dt;
    } else {
        st.inside = false;
        st.integral = 0.0;
    }
    return st;
}

inline double surge_pi(double u, const LosSpeed& cmd, const AntiWindupState& aw, double l, double k_pu, double k_iu) {
    if (l < 0.0 || cmd.kill) return 0.0;
    return -k_pu * (u - cmd.u) - k_iu * aw.integral;
}

/// Composes guidance, heading P and surge PI. Surge is dropped (kill) inside
/// R_min while the heading loop keeps steering to the trajectory heading.
inline std::pair<ControlOutput, AntiWindupState> reverse_control(const ReverseGains& gains, const VehicleState& s,
                                                                 const SampleView& ref, AntiWindupState aw,
                                                                 double dt) {
    const Vec2 p = s.position();
    const Vec2 p_next = ref.next.eta.head<2>();
    const LosDistances d = los_distances(p, p_next, gains.R_min);
    const double psi_los = los_heading(p, p_next, ref.next.eta(2), d.l);
    double t_next = ref.next.t;
    if (t_next <= s.t) t_next = s.t + dt;  // end of trajectory: keep a one-step horizon
    const LosSpeed cmd = los_speed(d.l, s.t, t_next, gains.u_rev_max);

    if (cmd.kill) {
        aw = AntiWindupState{};
    } else {
        aw = antiwindup_update(aw, s.u, cmd.u, s.t, dt, gains.alpha_min, gains.alpha_max);
    }
    ControlOutput out;
    out.tau(0) = surge_pi(s.u, cmd, aw, d.l, gains.k_pu, gains.k_iu);
    out.tau(1) = 0.0;
    out.tau(2) = heading_p(s.psi, psi_los, gains.k_psi);
    out.kill = cmd.kill;
    return {out, aw};
}

class ReverseController {
public:
    ReverseController() = default;
    explicit ReverseController(ReverseGains gains) : gains_(gains) {}

    ControlOutput compute(const VehicleState& s, const SampleView& ref, double dt) {
        auto [out, aw] = reverse_control(gains_, s, ref, aw_, dt);
        aw_ = aw;
        return out;
    }

    void reset() { aw_ = {}; }
    const AntiWindupState& antiwindup() const { return aw_; }
    const ReverseGains& gains() const { return gains_; }

private:
    ReverseGains gains_;
    AntiWindupState aw_;
};

}  // namespace usv
