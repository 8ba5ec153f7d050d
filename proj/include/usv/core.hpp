#pragma once

// Shared vocabulary types for the vehicle stack: fixed-size linear algebra
// aliases, plant state, controller output and the error hierarchy.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace usv {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Maps any finite angle onto (-pi, pi].
inline double wrap_angle(double theta) {
    double w = std::fmod(theta, 2.0 * kPi);
    if (w > kPi) {
        w -= 2.0 * kPi;
    } else if (w <= -kPi) {
        w += 2.0 * kPi;
    }
    return w;
}

// Errors ------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Thrown by the transit law when the neighborhood makes B(delta) singular.
class SingularNeighborhood : public Error {
public:
    using Error::Error;
};

class AllocationSingular : public Error {
public:
    using Error::Error;
};

class IntegrationBlowup : public Error {
public:
    using Error::Error;
};

class TrajectoryError : public Error {
public:
    using Error::Error;
};

class SupervisorFailure : public Error {
public:
    using Error::Error;
};

// Plant state and controller output -----------------------------------------

/// Pose in NED (x north, y east, psi from north toward east) and body velocity.
struct VehicleState {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;
    double u = 0.0;
    double v = 0.0;
    double r = 0.0;
    double t = 0.0;

    Vec3 eta() const { return {x, y, psi}; }
    Vec3 nu() const { return {u, v, r}; }
    Vec2 position() const { return {x, y}; }

    static VehicleState from(const Vec3& eta, const Vec3& nu, double t) {
        return {eta.x(), eta.y(), eta.z(), nu.x(), nu.y(), nu.z(), t};
    }

    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(psi) && std::isfinite(u) &&
               std::isfinite(v) && std::isfinite(r) && std::isfinite(t);
    }
};

/// Generalized force [X, Y, N]; `kill` asks allocation to drop surge thrust.
struct ControlOutput {
    Vec3 tau = Vec3::Zero();
    bool kill = false;
};

}  // namespace usv
