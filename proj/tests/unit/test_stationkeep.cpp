#include "catch_amalgamated.hpp"

#include "usv/allocation.hpp"
#include "usv/stationkeep.hpp"

#include <random>

using namespace usv;
using Catch::Approx;

TEST_CASE("pose error", "[stationkeep]") {
    CHECK(pose_error(Vec3(1, 2, 0.5), Vec3(1, 2, 0.5)).isZero(0.0));
    const Vec3 e = pose_error(Vec3(4, -1, -3.0), Vec3(1, 1, 3.0));
    CHECK(e(0) == 3.0);
    CHECK(e(1) == -2.0);
    CHECK(e(2) == Approx(-6.0 + 2 * kPi));
    CHECK(e(2) == Approx(0.2832).margin(1e-4));
}

TEST_CASE("virtual references", "[stationkeep]") {
    const VirtualRefs zero = virtual_refs(Vec3(1, 1, 0.3), Vec3(1, 1, 0.3), Vec3::Zero(), Mat3::Identity(), 0.3);
    CHECK(zero.etar_dot.isZero(0.0));
    CHECK(zero.nu_r.isZero(0.0));

    const VirtualRefs a = virtual_refs(Vec3(1, 0, 0), Vec3::Zero(), Vec3::Zero(), Mat3::Identity(), 0.0);
    CHECK(a.etar_dot == Vec3(-1, 0, 0));
    CHECK(a.nu_r == Vec3(-1, 0, 0));

    const VirtualRefs b = virtual_refs(Vec3(1, 0, kPi / 2), Vec3(0, 0, kPi / 2), Vec3::Zero(), Mat3::Identity(),
                                       kPi / 2);
    const Vec3 solved = rotation(kPi / 2).partialPivLu().solve(b.etar_dot);
    CHECK((b.nu_r - solved).norm() < 1e-15);
    CHECK(b.nu_r(1) == Approx(1.0));
}

TEST_CASE("tracking surface", "[stationkeep]") {
    CHECK(tracking_surface(Vec3(1, 2, 3), Vec3(1, 2, 3)).isZero(0.0));
    CHECK(tracking_surface(Vec3::Zero(), Vec3(-1, 0, 0)) == Vec3(1, 0, 0));
    const Vec3 r(0.3, -0.2, 0.1);
    const Vec3 a(1, 2, 3), b(-2, 0.5, 1);
    CHECK((tracking_surface(a + b, r) - (tracking_surface(a, r) + tracking_surface(b, Vec3::Zero()))).norm() < 1e-15);
}

TEST_CASE("station-keeping law", "[stationkeep]") {
    const VehicleParams p;
    StationKeepGains g;

    SECTION("zero at the setpoint") {
        VehicleState s;
        s.x = 3;
        s.y = -2;
        s.psi = 1.1;
        const ControlOutput o = sk_control(p, g, s, s.eta(), Vec3::Zero(), 0.1);
        CHECK(o.tau.isZero(0.0));
        CHECK_FALSE(o.kill);
    }
    SECTION("hand-evaluated point") {
        g.Lambda = Mat3::Identity();
        VehicleState s;
        s.x = 1.0;
        const ControlOutput o = sk_control(p, g, s, Vec3::Zero(), std::nullopt, 0.1);
        // nu_r = (-1,0,0), s = (1,0,0), D_sk nu_r = (X_u, 0, 0)
        const double want = p.X_u - g.K_d(0, 0) - g.K_p(0, 0);
        CHECK(o.tau(0) == Approx(want));
        CHECK(o.tau(1) == Approx(0.0).margin(1e-12));
        CHECK(o.tau(2) == Approx(0.0).margin(1e-12));
    }
    SECTION("lateral error gives a sway force") {
        VehicleState s;
        s.y = 1.0;
        CHECK(std::abs(sk_control(p, g, s, Vec3::Zero(), std::nullopt, 0.1).tau(1)) > 1.0);
    }
    SECTION("body-frame output invariant under scene rotation") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        for (int i = 0; i < 200; ++i) {
            VehicleState s;
            s.x = 5 * U(rng);
            s.y = 5 * U(rng);
            s.psi = U(rng);
            s.u = 0.5 * U(rng);
            s.v = 0.5 * U(rng);
            s.r = 0.2 * U(rng);
            const Vec3 target(5 * U(rng), 5 * U(rng), U(rng));
            const double a = 3 * U(rng);
            const Mat3 Ra = rotation(a);
            VehicleState rs = s;
            const Vec3 rp = Ra * Vec3(s.x, s.y, 0.0);
            rs.x = rp(0);
            rs.y = rp(1);
            rs.psi = wrap_angle(s.psi + a);
            Vec3 rt = Ra * Vec3(target(0), target(1), 0.0);
            rt(2) = wrap_angle(target(2) + a);
            const Vec3 t1 = sk_control(p, g, s, target, std::nullopt, 0.1).tau;
            const Vec3 t2 = sk_control(p, g, rs, rt, std::nullopt, 0.1).tau;
            REQUIRE((t1 - t2).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, t1.norm()));
        }
    }
    SECTION("gain validation") {
        CHECK_NOTHROW(g.validate());
        g.K_d(2, 2) = -1.0;
        CHECK_THROWS_AS(g.validate(), ConfigError);
    }
}

TEST_CASE("station-keeping regulation from 5 m and 45 deg", "[stationkeep]") {
    const VehicleParams p;
    StationKeepController c(p, StationKeepGains{});
    AllocatorConfig acfg;
    acfg.beta = AllocatorConfig::beta_for(0.5, p.N_max);
    const Allocator alloc(p, acfg);
    const auto traj = build_reference({Segment::hold(Vec3::Zero(), 70.0)}, 10.0);
    VehicleState s;
    s.x = 5.0 / std::sqrt(2.0);
    s.y = 5.0 / std::sqrt(2.0);
    s.psi = deg2rad(45.0);
    double peak_pos = 0.0, peak_psi = 0.0;
    for (int k = 0; k < 600; ++k) {
        const ControlOutput o = c.compute(s, sample(traj, s.t), 0.1);
        const Vec3 tau = alloc.wrench(alloc.allocate(AllocationPath::Overactuated, o));
        s = step(p, ModelKind::General, s, tau, Vec3::Zero(), 0.1);
        s.t = (k + 1) * 0.1;
        peak_pos = std::max(peak_pos, s.position().norm());
        peak_psi = std::max(peak_psi, std::abs(rad2deg(s.psi)));
    }
    CHECK(s.position().norm() < 0.1);
    CHECK(std::abs(rad2deg(s.psi)) < 2.0);
    CHECK(peak_pos <= 1.5 * 5.0);
    CHECK(peak_psi <= 1.5 * 45.0);
}
