// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "usv/harness.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <set>

using namespace usv;

namespace {

constexpr double kPiRMargin = 1.1;
constexpr double kCompareBudgetS = 300.0;
constexpr double kTransitShare = 0.95;
constexpr double kAllocResidual = 1e-9;
constexpr double kAllocCostRel = 1e-9;
constexpr double kPinvTol = 1e-12;
constexpr double kRoundTripTol = 1e-12;
constexpr double kSkPosTol = 0.1;     // m
constexpr double kSkPsiTolDeg = 2.0;  // deg
constexpr double kSkHorizon = 60.0;   // s
constexpr double kBallMargin = 0.5;   // m
constexpr double kSurgeRef = -0.8;    // m/s
constexpr double kSurgeErrTol = 0.02;
constexpr double kAsternCap = 60.0;   // N, saturating astern thrust
constexpr double kRotTol = 1e-12;
constexpr double kSkewTol = 1e-12;
constexpr double kOracleTol = 1e-12;
constexpr double kHalvingTol = 1e-5;

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

std::vector<std::uint64_t> default_seeds(const ExperimentConfig& cfg) {
    std::vector<std::uint64_t> s;
    for (int i = 0; i < cfg.seeds; ++i) s.push_back(cfg.base_seed + static_cast<std::uint64_t>(i));
    return s;
}

void criterion1() {
    const ExperimentConfig cfg;
    const auto t0 = std::chrono::steady_clock::now();
    const Comparison c = compare(cfg, default_seeds(cfg));
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& a = c.average;
    double best_r = std::numeric_limits<double>::infinity();
    for (Mode m : {Mode::TransitOnly, Mode::SKOnly, Mode::RevOnly}) best_r = std::min(best_r, a.at(m).Pi_r);
    const bool ok = c.passed && wall < kCompareBudgetS && pbssc_ordering_holds(a, kPiRMargin);
    report(1, ok,
           fmt("avg Pi_psi pbssc=%.1f transit=%.1f sk=%.1f rev=%.1f", a.at(Mode::PBSSC).Pi_psi,
               a.at(Mode::TransitOnly).Pi_psi, a.at(Mode::SKOnly).Pi_psi, a.at(Mode::RevOnly).Pi_psi) +
               fmt("; Pi_r pbssc=%.2f best=%.2f; seeds %g/%g", a.at(Mode::PBSSC).Pi_r, best_r, c.seeds_passing,
                   static_cast<double>(c.seeds.size())) +
               fmt("; %.1f s", wall));
}

void criterion2() {
    const ExperimentConfig cfg;
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed : default_seeds(cfg)) {
        const RunRecord rec = run_experiment(cfg, Mode::PBSSC, seed);
        int transit_steps = 0, seg_steps = 0;
        std::set<int> hold_ids;
        for (const RunRow& r : rec.rows) {
            if (r.segment == 1) {
                ++seg_steps;
                transit_steps += r.sigma == kTransitId;
            } else if (r.segment % 2 == 0) {
                hold_ids.insert(r.sigma);
            }
        }
        const double share = seg_steps ? static_cast<double>(transit_steps) / seg_steps : 0.0;
        ok = ok && share >= kTransitShare && hold_ids.size() >= 2 && !rec.supervisor_failed;
        detail += fmt("seed %g share=%.3f holds=%g; ", static_cast<double>(seed), share,
                      static_cast<double>(hold_ids.size()));
    }
    report(2, ok, detail);
}

Eigen::VectorXd kkt_oracle(const Eigen::MatrixXd& T, const Eigen::MatrixXd& W, const Vec3& tau) {
    const Eigen::Index n = T.cols();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + 3, n + 3);
    K.topLeftCorner(n, n) = 2.0 * W;
    K.topRightCorner(n, 3) = T.transpose();
    K.bottomLeftCorner(3, n) = T;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 3);
    rhs.tail(3) = tau;
    return K.fullPivLu().solve(rhs).head(n);
}

void criterion3() {
    const VehicleParams p;
    const Eigen::MatrixXd T = extended_transform(p.thrusters);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double worst_res = 0.0, worst_cost = 0.0;
    for (int i = 0; i < 1000; ++i) {
        AllocatorConfig cfg;
        if (i % 2) {
            Eigen::MatrixXd A(4, 4);
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c) A(r, c) = U(rng);
            cfg.W = A * A.transpose() + 0.5 * Eigen::MatrixXd::Identity(4, 4);
        } else {
            cfg.W = Eigen::MatrixXd::Identity(4, 4);
        }
        const OveractuatedAllocator alloc(p, cfg);
        const Vec3 tau(p.T_max * U(rng), 0.5 * p.T_max * U(rng), p.N_max * U(rng));
        const Eigen::VectorXd f = alloc.solve(tau);
        const Eigen::VectorXd o = kkt_oracle(T, cfg.W, tau);
        const double co = o.dot(cfg.W * o);
        worst_res = std::max(worst_res, (T * f - tau).norm());
        worst_cost = std::max(worst_cost, std::abs(f.dot(cfg.W * f) - co) / std::max(1.0, co));
    }
    const Eigen::MatrixXd Tp = weighted_pseudoinverse(T, Eigen::MatrixXd::Identity(4, 4));
    const Eigen::MatrixXd mp = T.transpose() * (T * T.transpose()).inverse();
    const double pinv = (Tp - mp).cwiseAbs().maxCoeff();
    report(3, worst_res <= kAllocResidual && worst_cost <= kAllocCostRel && pinv <= kPinvTol,
           fmt("residual=%.2e cost_rel=%.2e pinv=%.2e", worst_res, worst_cost, pinv));
}

void criterion4() {
    const VehicleParams p;
    const auto [lp, ls] = lateral_arms(p);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double X = 200.0 * U(rng), N = 200.0 * U(rng);
        const DifferentialThrust t = alloc_differential(X, N, lp, ls, std::numeric_limits<double>::infinity());
        const Vec2 w = differential_wrench(t, lp, ls);
        worst = std::max({worst, std::abs(w(0) - X) / std::max(1.0, std::abs(X)),
                          std::abs(w(1) - N) / std::max(1.0, std::abs(N))});
    }
    report(4, worst <= kRoundTripTol, fmt("max relative error=%.2e", worst));
}

void criterion5() {
    ExperimentConfig cfg;
    cfg.segments = {Segment::hold(Vec3::Zero(), kSkHorizon)};
    cfg.disturbance.mode = DisturbanceMode::None;
    cfg.finalize();
    RunOptions opts;
    opts.initial = VehicleState::from(Vec3(5.0 / std::sqrt(2.0), 5.0 / std::sqrt(2.0), deg2rad(45.0)), Vec3::Zero(), 0);
    const RunRecord rec = run_experiment(cfg, Mode::SKOnly, 1, opts);
    const RunRow& last = rec.rows.back();
    const double pos = last.state.position().norm();
    const double psi = std::abs(rad2deg(wrap_angle(last.state.psi)));
    report(5, pos < kSkPosTol && psi < kSkPsiTolDeg && last.t <= kSkHorizon + 1e-9,
           fmt("t=%.1f s position error=%.4f m heading error=%.3f deg", last.t, pos, psi));
}

void criterion6() {
    ExperimentConfig cfg;
    cfg.segments = {Segment::transit(Vec2(0, 0), Vec2(0, 150), 1.0, 0.0)};
    cfg.disturbance.mode = DisturbanceMode::None;
    cfg.finalize();
    RunOptions opts;
    opts.initial = VehicleState::from(Vec3(5.0, 0.0, kPi / 2), Vec3::Zero(), 0.0);
    const RunRecord rec = run_experiment(cfg, Mode::TransitOnly, 1, opts);
    const double bound = cfg.transit.delta.norm() + kBallMargin;
    std::size_t entered = rec.rows.size();
    double worst_after = 0.0;
    for (std::size_t k = rec.rows.size(); k-- > 0;) {
        const RunRow& r = rec.rows[k];
        const double pt = position_error(r.state.position(), r.eta_d.head<2>(), r.state.psi).norm();
        if (pt >= bound) break;
        entered = k;
        worst_after = std::max(worst_after, pt);
    }
    const bool ok = entered < rec.rows.size() && entered > 0;
    report(6, ok,
           fmt("bound=%.3f m entered at t=%.1f s, max after entry=%.3f m", bound,
               ok ? rec.rows[entered].t : -1.0, worst_after));
}

struct StepResult {
    double final_error, overshoot;
};

StepResult surge_step(const ReverseGains& g, bool always_on, double cap) {
    const VehicleParams p;
    VehicleState s;
    AntiWindupState aw;
    double integral = 0.0, peak = 0.0;
    const double dt = 0.1;
    for (int k = 0; k < 600; ++k) {
        double X;
        if (always_on) {
            integral += (s.u - kSurgeRef) * dt;
            X = -g.k_pu * (s.u - kSurgeRef) - g.k_iu * integral;
        } else {
            aw = antiwindup_update(aw, s.u, kSurgeRef, s.t, dt, g.alpha_min, g.alpha_max);
            X = surge_pi(s.u, LosSpeed{kSurgeRef, false}, aw, 1.0, g.k_pu, g.k_iu);
        }
        X = std::clamp(X, -cap, cap);
        s = step(p, ModelKind::Reversing, s, Vec3(X, 0, 0), Vec3::Zero(), dt);
        s.t = (k + 1) * dt;
        peak = std::max(peak, std::abs(s.u));
    }
    return {std::abs(s.u - kSurgeRef), std::max(0.0, peak - std::abs(kSurgeRef))};
}

void criterion7() {
    const ReverseGains g;
    const double inf = std::numeric_limits<double>::infinity();
    const StepResult aw = surge_step(g, false, inf), plain = surge_step(g, true, inf);
    const StepResult aw_sat = surge_step(g, false, kAsternCap), plain_sat = surge_step(g, true, kAsternCap);
    const bool ok = aw.final_error < kSurgeErrTol && aw.overshoot <= plain.overshoot &&
                    aw_sat.final_error < kSurgeErrTol && aw_sat.overshoot <= plain_sat.overshoot &&
                    plain_sat.overshoot > 0.0;
    report(7, ok,
           fmt("final error=%.4f m/s overshoot=%.4f (always-on %.4f)", aw.final_error, aw.overshoot,
               plain.overshoot) +
               fmt("; saturated: error=%.4f overshoot=%.4f (always-on %.4f)", aw_sat.final_error, aw_sat.overshoot,
                   plain_sat.overshoot));
}

std::vector<int> replay(const std::vector<std::map<int, double>>& trace, double h, int first) {
    std::vector<int> s{first};
    for (std::size_t k = 1; k < trace.size(); ++k) s.push_back(select_controller(trace[k], s.back(), h));
    return s;
}

int switches(const std::vector<int>& s) {
    int n = 0;
    for (std::size_t k = 1; k < s.size(); ++k) n += s[k] != s[k - 1];
    return n;
}

void criterion8() {
    const std::vector<std::map<int, double>> golden{
        {{1, 1.0}, {2, 2.0}, {3, 3.0}}, {{1, 1.0}, {2, 0.9}, {3, 3.0}}, {{1, 1.0}, {2, 0.5}, {3, 3.0}},
        {{1, 0.45}, {2, 0.5}, {3, 3.0}}, {{1, 0.4}, {2, 0.5}, {3, 3.0}}, {{1, 1.0}, {2, 1.0}, {3, 1.0}},
        {{1, 1.2}, {2, 1.0}, {3, 1.0}}, {{1, 5.0}, {2, 5.0}, {3, 4.1}},
    };
    // 0.9 is not a 20% improvement on 1.0; 0.5 is. 0.4 beats 0.5 by exactly 20%.
    const bool golden_ok = replay(golden, 0.2, 1) == std::vector<int>{1, 1, 2, 2, 1, 1, 2, 3};

    const ExperimentConfig cfg;
    const RunRecord rec = run_experiment(cfg, Mode::PBSSC, cfg.base_seed + 1);
    std::vector<std::map<int, double>> trace;
    for (const auto& r : rec.rows) trace.push_back(r.mu);
    std::vector<int> recorded;
    for (const auto& r : rec.rows) recorded.push_back(r.sigma);
    const bool replay_ok = replay(trace, cfg.supervisor.h, recorded.front()) == recorded;
    bool mono = true;
    int prev = std::numeric_limits<int>::max();
    std::string counts;
    for (double h : {0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0}) {
        const int n = switches(replay(trace, h, recorded.front()));
        mono = mono && n <= prev;
        prev = n;
        counts += std::to_string(n) + " ";
    }
    report(8, golden_ok && replay_ok && mono,
           std::string("golden=") + (golden_ok ? "ok" : "mismatch") + " replay=" + (replay_ok ? "ok" : "mismatch") +
               " switches(h)=" + counts);
}

void criterion9() {
    VehicleParams p;
    p.X_du = -20.0;
    p.Y_dv = -70.0;
    p.Y_dr = -5.0;
    p.N_dv = -3.0;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double rot = 0.0, skew = 0.0, oracle = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double psi = 10.0 * U(rng);
        const Mat3 R = rotation(psi);
        rot = std::max({rot, (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff(),
                        std::abs(R.determinant() - 1.0)});
        const Vec3 nu(2 * U(rng), U(rng), U(rng));
        for (ModelKind k : {ModelKind::General, ModelKind::StationKeeping}) {
            const Mat3 C = coriolis(p, k, nu);
            skew = std::max(skew, (C + C.transpose()).cwiseAbs().maxCoeff());
        }

        VehicleState s = VehicleState::from(Vec3(U(rng), U(rng), psi), nu, 0.0);
        const Vec3 tau(100 * U(rng), 20 * U(rng), 50 * U(rng)), d(5 * U(rng), 5 * U(rng), 5 * U(rng));
        const StateDerivative dd = dynamics(p, ModelKind::General, s, tau, d);
        const double u = s.u, v = s.v, r = s.r;
        const double m11 = p.m - p.X_du, m22 = p.m - p.Y_dv, m33 = p.I_z - p.N_dr;
        const double c13 = -m22 * v + 0.5 * (p.Y_dr + p.N_dv) * r, c23 = m11 * u;
        const double b0 = tau(0) + d(0) - c13 * r + (p.X_uu * std::abs(u) + p.X_u) * u;
        const double b1 = tau(1) + d(1) - c23 * r + p.Y_v * v + p.Y_r * r;
        const double b2 = tau(2) + d(2) + c13 * u + c23 * v + p.N_v * v + p.N_r * r;
        const double a12 = -p.Y_dr, a21 = -p.N_dv, det = m22 * m33 - a12 * a21;
        const Vec3 nu_dot(b0 / m11, (b1 * m33 - a12 * b2) / det, (m22 * b2 - a21 * b1) / det);
        const Vec3 eta_dot(std::cos(psi) * u - std::sin(psi) * v, std::sin(psi) * u + std::cos(psi) * v, r);
        oracle = std::max({oracle, (dd.nu_dot - nu_dot).norm() / std::max(1.0, nu_dot.norm()),
                           (dd.eta_dot - eta_dot).norm() / std::max(1.0, eta_dot.norm())});
    }

    auto run = [&](double dt) {
        VehicleState s;
        s.u = 0.5;
        s.psi = 0.3;
        const int n = static_cast<int>(std::lround(10.0 / dt));
        for (int k = 0; k < n; ++k) s = step(p, ModelKind::General, s, Vec3(80.0, 10.0, 15.0), Vec3::Zero(), dt);
        Eigen::Matrix<double, 6, 1> x;
        x << s.eta(), s.nu();
        return x;
    };
    const auto a = run(0.1), b = run(0.05);
    const double halving = (a - b).norm() / b.norm();
    report(9, rot <= kRotTol && skew <= kSkewTol && oracle <= kOracleTol && halving < kHalvingTol,
           fmt("rotation=%.1e skew=%.1e oracle=%.1e dt-halving=%.2e", rot, skew, oracle, halving));
}

void criterion10() {
    const ExperimentConfig cfg;
    bool ok = true;
    for (Mode m : all_modes()) {
        const std::string a = to_csv(run_experiment(cfg, m, cfg.base_seed));
        const std::string b = to_csv(run_experiment(cfg, m, cfg.base_seed));
        ok = ok && a == b && !a.empty();
    }
    const auto dir = std::filesystem::temp_directory_path() / "usv_acceptance";
    const RunRecord rec = run_experiment(cfg, Mode::PBSSC, cfg.base_seed + 3);
    detail::write_atomic(dir / "a.csv", to_csv(rec));
    detail::write_atomic(dir / "b.csv", to_csv(run_experiment(cfg, Mode::PBSSC, cfg.base_seed + 3)));
    auto slurp = [](const std::filesystem::path& f) {
        std::ifstream in(f, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    const bool files = slurp(dir / "a.csv") == slurp(dir / "b.csv");
    std::filesystem::remove_all(dir);
    report(10, ok && files, std::string("in-memory ") + (ok ? "identical" : "differ") + ", files " +
                                (files ? "identical" : "differ"));
}

}  // namespace

int main() {
    const std::pair<int, void (*)()> criteria[] = {{1, criterion1}, {2, criterion2}, {3, criterion3},
                                                   {4, criterion4}, {5, criterion5}, {6, criterion6},
                                                   {7, criterion7}, {8, criterion8}, {9, criterion9},
                                                   {10, criterion10}};
    for (const auto& [n, fn] : criteria) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(n, false, std::string("exception: ") + e.what());
        }
    }
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
