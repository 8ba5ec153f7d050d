#pragma once

// Time-parameterized reference trajectories built from hold and straight
// transit segments, sampled at a fixed rate with zero-order hold.

#include "usv/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace usv {

enum class SegmentKind { Hold, Transit };

struct Segment {
    SegmentKind kind = SegmentKind::Hold;
    double duration = 0.0;  // s; derived for Transit
    Vec3 start = Vec3::Zero();
    Vec3 end = Vec3::Zero();
    double speed = 0.0;  // m/s cruise, Transit only
    double accel = 0.0;  // m/s^2, Transit only

    static Segment hold(const Vec3& pose, double duration) {
        Segment s;
        s.kind = SegmentKind::Hold;
        s.start = pose;
        s.end = pose;
        s.duration = duration;
        return s;
    }

    /// Straight line from `from` to `to` (positions), heading along the motion.
    static Segment transit(const Vec2& from, const Vec2& to, double speed, double accel) {
        Segment s;
        s.kind = SegmentKind::Transit;
        const Vec2 d = to - from;
        const double heading = std::atan2(d.y(), d.x());
        s.start = {from.x(), from.y(), heading};
        s.end = {to.x(), to.y(), heading};
        s.speed = speed;
        s.accel = accel;
        s.duration = transit_duration(d.norm(), speed, accel);
        return s;
    }

    /// Trapezoidal (or triangular, for short legs) profile duration.
    static double transit_duration(double length, double speed, double accel) {
        if (length <= 0.0 || speed <= 0.0) return 0.0;
        if (accel <= 0.0) return length / speed;
        if (length >= speed * speed / accel) return length / speed + speed / accel;
        return 2.0 * std::sqrt(length / accel);
    }
};

/// One sample of eta_d(t) and its first two derivatives.
struct TrajectorySample {
    double t = 0.0;
    Vec3 eta = Vec3::Zero();
    Vec3 eta_dot = Vec3::Zero();
    Vec3 eta_ddot = Vec3::Zero();
    int segment = 0;
};

struct ReferenceTrajectory {
    std::vector<TrajectorySample> samples;
    std::vector<Segment> segments;
    double dt = 0.1;

    double t_final() const { return samples.empty() ? 0.0 : samples.back().t; }
    std::size_t size() const { return samples.size(); }
};

namespace detail {

/// Distance, speed and acceleration along a trapezoidal profile at time tau.
struct ProfilePoint {
    double s = 0.0;
    double v = 0.0;
    double a = 0.0;
};

inline ProfilePoint trapezoid(double length, double speed, double accel, double tau) {
    if (length <= 0.0) return {};
    if (accel <= 0.0) {
        const double s = std::clamp(speed * tau, 0.0, length);
        return {s, s < length ? speed : 0.0, 0.0};
    }
    const double total = Segment::transit_duration(length, speed, accel);
    tau = std::clamp(tau, 0.0, total);
    double t_ramp = speed / accel;
    double v_peak = speed;
    if (length < speed * speed / accel) {
        t_ramp = std::sqrt(length / accel);
        v_peak = accel * t_ramp;
    }
    const double s_ramp = 0.5 * accel * t_ramp * t_ramp;
    if (tau < t_ramp) return {0.5 * accel * tau * tau, accel * tau, accel};
    const double t_cruise_end = total - t_ramp;
    if (tau < t_cruise_end) return {s_ramp + v_peak * (tau - t_ramp), v_peak, 0.0};
    const double rem = total - tau;
    if (rem <= 0.0) return {length, 0.0, 0.0};
    return {length - 0.5 * accel * rem * rem, accel * rem, -accel};
}

}  // namespace detail

/// Samples the segment list at `rate` Hz. Throws TrajectoryError when a
/// segment does not start where the previous one ended.
inline ReferenceTrajectory build_reference(const std::vector<Segment>& segments, double rate) {
    if (!(rate > 0.0)) throw TrajectoryError("trajectory rate must be positive");
    constexpr double kContiguity = 1e-9;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const Segment& s = segments[i];
        if (!(s.duration >= 0.0)) throw TrajectoryError("segment " + std::to_string(i) + ": negative duration");
        if (s.kind == SegmentKind::Transit) {
            if (!(s.speed > 0.0)) throw TrajectoryError("segment " + std::to_string(i) + ": transit speed must be positive");
            if ((s.end.head<2>() - s.start.head<2>()).norm() == 0.0) {
                throw TrajectoryError("segment " + std::to_string(i) + ": transit start equals end");
            }
        }
        if (i > 0 && (segments[i - 1].end.head<2>() - s.start.head<2>()).norm() > kContiguity) {
            throw TrajectoryError("segment " + std::to_string(i) + " does not start where segment " +
                                  std::to_string(i - 1) + " ends");
        }
    }

    ReferenceTrajectory traj;
    traj.segments = segments;
    traj.dt = 1.0 / rate;

    std::vector<double> starts;
    double total = 0.0;
    for (const auto& s : segments) {
        starts.push_back(total);
        total += s.duration;
    }
    const auto n = static_cast<long>(std::llround(total * rate));
    traj.samples.reserve(static_cast<std::size_t>(n + 1));
    std::size_t seg = 0;
    for (long k = 0; k <= n; ++k) {
        TrajectorySample smp;
        smp.t = static_cast<double>(k) / rate;
        if (segments.empty()) {
            traj.samples.push_back(smp);
            continue;
        }
        while (seg + 1 < segments.size() && smp.t >= starts[seg + 1] - 1e-9) ++seg;
        const Segment& s = segments[seg];
        smp.segment = static_cast<int>(seg);
        if (s.kind == SegmentKind::Hold) {
            smp.eta = s.start;
        } else {
            const Vec2 d = s.end.head<2>() - s.start.head<2>();
            const double length = d.norm();
            const Vec2 dir = d / length;
            const auto pp = detail::trapezoid(length, s.speed, s.accel, smp.t - starts[seg]);
            smp.eta.head<2>() = s.start.head<2>() + pp.s * dir;
            smp.eta(2) = s.start(2);
            smp.eta_dot.head<2>() = pp.v * dir;
            smp.eta_ddot.head<2>() = pp.a * dir;
        }
        smp.eta(2) = wrap_angle(smp.eta(2));
        traj.samples.push_back(smp);
    }
    return traj;
}

/// Index of the sample active at time t (floor semantics, clamped).
inline std::size_t sample_index(const ReferenceTrajectory& traj, double t) {
    if (traj.samples.empty()) throw TrajectoryError("empty trajectory");
    const double k = std::floor((t - traj.samples.front().t) / traj.dt + 1e-9);
    if (k <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(k), traj.samples.size() - 1);
}

struct SampleView {
    TrajectorySample current;
    TrajectorySample next;  // eta_d(t_{k+1}); equals `current` at the end
};

inline SampleView sample(const ReferenceTrajectory& traj, double t) {
    const std::size_t k = sample_index(traj, t);
    const std::size_t k1 = std::min(k + 1, traj.samples.size() - 1);
    return {traj.samples[k], traj.samples[k1]};
}

/// The five-leg experiment: hold East, transit East, hold West, transit back
/// West, hold. Headings use NED (East = +pi/2).
inline std::vector<Segment> five_segment_plan(double hold_s = 30.0, double leg_m = 80.0, double speed = 1.0,
                                              double accel = 0.05) {
    const Vec2 origin(0.0, 0.0);
    const Vec2 east(0.0, leg_m);
    const double kEast = kPi / 2.0;
    const double kWest = -kPi / 2.0;
    return {
        Segment::hold({origin.x(), origin.y(), kEast}, hold_s),
        Segment::transit(origin, east, speed, accel),
        Segment::hold({east.x(), east.y(), kWest}, hold_s),
        Segment::transit(east, origin, speed, accel),
        Segment::hold({origin.x(), origin.y(), kWest}, hold_s),
    };
}

}  // namespace usv
