#pragma once

// Experiment configuration: one JSON document (comments allowed) with
// sections for the vehicle, each controller, allocation, supervisor,
// disturbance and the trajectory. Every key is optional; missing keys keep
// the compiled-in defaults.

#include "usv/controller.hpp"
#include "usv/supervisor.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace usv {

using nlohmann::json;

struct ExperimentConfig {
    VehicleParams vehicle;
    TransitGains transit;
    StationKeepGains station_keep;
    ReverseGains reverse;
    AllocatorConfig allocation;
    double surge_fraction_at_max_yaw = 0.5;
    SupervisorConfig supervisor;
    DisturbanceConfig disturbance;
    double dt = 0.1;  // s, controller and plant rate
    std::vector<Segment> segments = five_segment_plan();
    std::uint64_t base_seed = 1;
    int seeds = 5;

    ExperimentConfig() { finalize(); }

    /// Recomputes derived values and checks every section.
    void finalize() {
        allocation.beta = AllocatorConfig::beta_for(surge_fraction_at_max_yaw, vehicle.N_max);
        vehicle.validate();
        transit.validate();
        station_keep.validate();
        reverse.validate();
        supervisor.validate();
        if (!(dt > 0.0)) throw ConfigError("dt must be positive");
        if (allocation.beta < 0.0) throw ConfigError("allocation: beta must be >= 0");
        if (seeds < 1) throw ConfigError("seeds must be >= 1");
    }
};

namespace detail {

inline Mat2 diag2(const json& j) {
    if (j.is_array() && j.size() == 2 && j[0].is_number()) return Vec2(j[0].get<double>(), j[1].get<double>()).asDiagonal();
    if (j.is_array() && j.size() == 2 && j[0].is_array()) {
        Mat2 M;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) M(r, c) = j[r][c].get<double>();
        return M;
    }
    throw ConfigError("expected a 2-vector diagonal or a 2x2 matrix");
}

inline Mat3 diag3(const json& j) {
    if (j.is_array() && j.size() == 3 && j[0].is_number()) {
        return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>()).asDiagonal();
    }
    if (j.is_array() && j.size() == 3 && j[0].is_array()) {
        Mat3 M;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) M(r, c) = j[r][c].get<double>();
        return M;
    }
    throw ConfigError("expected a 3-vector diagonal or a 3x3 matrix");
}

inline Vec3 vec3(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <class T>
void opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline json mat_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

inline double heading_from(const json& j) {
    if (j.is_number()) return deg2rad(j.get<double>());
    const auto s = j.get<std::string>();
    if (s == "N") return 0.0;
    if (s == "E") return kPi / 2.0;
    if (s == "S") return kPi;
    if (s == "W") return -kPi / 2.0;
    throw ConfigError("heading must be degrees or one of N/E/S/W, got '" + s + "'");
}

}  // namespace detail

inline void apply_json(const json& root, ExperimentConfig& cfg) {
    using namespace detail;
    try {
        if (root.contains("vehicle")) {
            const json& v = root["vehicle"];
            auto& p = cfg.vehicle;
            opt(v, "m", p.m);
            opt(v, "I_z", p.I_z);
            opt(v, "X_du", p.X_du);
            opt(v, "Y_dv", p.Y_dv);
            opt(v, "Y_dr", p.Y_dr);
            opt(v, "N_dv", p.N_dv);
            opt(v, "N_dr", p.N_dr);
            opt(v, "X_u", p.X_u);
            opt(v, "X_uu", p.X_uu);
            opt(v, "Y_v", p.Y_v);
            opt(v, "Y_r", p.Y_r);
            opt(v, "N_v", p.N_v);
            opt(v, "N_r", p.N_r);
            opt(v, "X_u_rev", p.X_u_rev);
            opt(v, "N_max", p.N_max);
            opt(v, "T_max", p.T_max);
            if (v.contains("thrusters")) {
                p.thrusters.clear();
                for (const auto& t : v["thrusters"]) p.thrusters.push_back({t.at("lx").get<double>(), t.at("ly").get<double>()});
            }
        }
        cfg.transit.N_clamp = cfg.vehicle.N_max;
        if (root.contains("transit")) {
            const json& t = root["transit"];
            auto& g = cfg.transit;
            if (t.contains("K_e")) g.K_e = diag2(t["K_e"]);
            if (t.contains("K_phi")) g.K_phi = diag2(t["K_phi"]);
            opt(t, "K_z2", g.K_z2);
            if (t.contains("delta")) g.delta = Vec2(t["delta"][0].get<double>(), t["delta"][1].get<double>());
            opt(t, "N_clamp", g.N_clamp);
            opt(t, "coupling_scale", g.coupling_scale);
        }
        if (root.contains("station_keep")) {
            const json& s = root["station_keep"];
            if (s.contains("Lambda")) cfg.station_keep.Lambda = diag3(s["Lambda"]);
            if (s.contains("K_p")) cfg.station_keep.K_p = diag3(s["K_p"]);
            if (s.contains("K_d")) cfg.station_keep.K_d = diag3(s["K_d"]);
        }
        if (root.contains("reverse")) {
            const json& r = root["reverse"];
            auto& g = cfg.reverse;
            opt(r, "k_psi", g.k_psi);
            opt(r, "k_pu", g.k_pu);
            opt(r, "k_iu", g.k_iu);
            opt(r, "alpha_min", g.alpha_min);
            opt(r, "alpha_max", g.alpha_max);
            opt(r, "R_min", g.R_min);
            opt(r, "u_rev_max", g.u_rev_max);
        }
        if (root.contains("allocation")) {
            const json& a = root["allocation"];
            opt(a, "surge_fraction_at_max_yaw", cfg.surge_fraction_at_max_yaw);
            if (a.contains("azimuth_limit_deg")) cfg.allocation.azimuth_limit = deg2rad(a["azimuth_limit_deg"].get<double>());
            if (a.contains("W")) {
                const json& w = a["W"];
                const auto n = static_cast<Eigen::Index>(w.size());
                Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
                for (Eigen::Index i = 0; i < n; ++i) {
                    if (w[i].is_number()) {
                        W(i, i) = w[i].get<double>();
                    } else {
                        for (Eigen::Index c = 0; c < n; ++c) W(i, c) = w[i][c].get<double>();
                    }
                }
                cfg.allocation.W = W;
            }
        }
        if (root.contains("supervisor")) {
            const json& s = root["supervisor"];
            auto& c = cfg.supervisor;
            opt(s, "K", c.K);
            opt(s, "L", c.L);
            opt(s, "alpha", c.alpha_w);
            opt(s, "beta", c.beta_w);
            opt(s, "forget", c.forget);
            opt(s, "h", c.h);
            if (s.contains("P")) c.P = diag3(s["P"]);
        }
        if (root.contains("disturbance")) {
            const json& d = root["disturbance"];
            auto& c = cfg.disturbance;
            if (d.contains("mode")) {
                const auto m = d["mode"].get<std::string>();
                if (m == "none") c.mode = DisturbanceMode::None;
                else if (m == "constant") c.mode = DisturbanceMode::Constant;
                else if (m == "gauss_markov") c.mode = DisturbanceMode::GaussMarkov;
                else throw ConfigError("disturbance.mode must be none|constant|gauss_markov");
            }
            if (d.contains("bias")) c.bias = vec3(d["bias"]);
            opt(d, "correlation_time", c.correlation_time);
            if (d.contains("intensity")) c.intensity = vec3(d["intensity"]);
        }
        if (root.contains("simulation")) {
            const json& s = root["simulation"];
            opt(s, "dt", cfg.dt);
            opt(s, "base_seed", cfg.base_seed);
            opt(s, "seeds", cfg.seeds);
        }
        if (root.contains("trajectory")) {
            std::vector<Segment> segs;
            Vec2 at(0.0, 0.0);
            const json& t = root["trajectory"];
            if (t.contains("start")) at = Vec2(t["start"][0].get<double>(), t["start"][1].get<double>());
            for (const auto& s : t.at("segments")) {
                const auto kind = s.at("kind").get<std::string>();
                if (kind == "hold") {
                    segs.push_back(Segment::hold({at.x(), at.y(), heading_from(s.at("heading"))},
                                                 s.at("duration").get<double>()));
                } else if (kind == "transit") {
                    const Vec2 to(s.at("to")[0].get<double>(), s.at("to")[1].get<double>());
                    segs.push_back(Segment::transit(at, to, s.at("speed").get<double>(), s.value("accel", 0.05)));
                    at = to;
                } else {
                    throw ConfigError("trajectory segment kind must be hold|transit");
                }
            }
            cfg.segments = segs;
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.finalize();
}

inline ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig cfg;
    apply_json(root, cfg);
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

/// Canonical JSON view of the resolved configuration.
inline json to_json(const ExperimentConfig& cfg) {
    using detail::mat_json;
    const auto& p = cfg.vehicle;
    json thr = json::array();
    for (const auto& t : p.thrusters) thr.push_back({{"lx", t.lx}, {"ly", t.ly}});
    json segs = json::array();
    for (const auto& s : cfg.segments) {
        segs.push_back({{"kind", s.kind == SegmentKind::Hold ? "hold" : "transit"},
                        {"start", {s.start(0), s.start(1), s.start(2)}},
                        {"end", {s.end(0), s.end(1), s.end(2)}},
                        {"duration", s.duration},
                        {"speed", s.speed},
                        {"accel", s.accel}});
    }
    const char* dmode = cfg.disturbance.mode == DisturbanceMode::None       ? "none"
                        : cfg.disturbance.mode == DisturbanceMode::Constant ? "constant"
                                                                             : "gauss_markov";
    return {
        {"vehicle", {{"m", p.m}, {"I_z", p.I_z}, {"X_du", p.X_du}, {"Y_dv", p.Y_dv}, {"Y_dr", p.Y_dr},
                     {"N_dv", p.N_dv}, {"N_dr", p.N_dr}, {"X_u", p.X_u}, {"X_uu", p.X_uu}, {"Y_v", p.Y_v},
                     {"Y_r", p.Y_r}, {"N_v", p.N_v}, {"N_r", p.N_r}, {"X_u_rev", p.X_u_rev},
                     {"N_max", p.N_max}, {"T_max", p.T_max}, {"thrusters", thr}}},
        {"transit", {{"K_e", mat_json(cfg.transit.K_e)}, {"K_phi", mat_json(cfg.transit.K_phi)},
                     {"K_z2", cfg.transit.K_z2}, {"delta", {cfg.transit.delta(0), cfg.transit.delta(1)}},
                     {"N_clamp", cfg.transit.N_clamp}, {"coupling_scale", cfg.transit.coupling_scale}}},
        {"station_keep", {{"Lambda", mat_json(cfg.station_keep.Lambda)}, {"K_p", mat_json(cfg.station_keep.K_p)},
                          {"K_d", mat_json(cfg.station_keep.K_d)}}},
        {"reverse", {{"k_psi", cfg.reverse.k_psi}, {"k_pu", cfg.reverse.k_pu}, {"k_iu", cfg.reverse.k_iu},
                     {"alpha_min", cfg.reverse.alpha_min}, {"alpha_max", cfg.reverse.alpha_max},
                     {"R_min", cfg.reverse.R_min}, {"u_rev_max", cfg.reverse.u_rev_max}}},
        {"allocation", {{"beta", cfg.allocation.beta}, {"azimuth_limit", cfg.allocation.azimuth_limit},
                        {"W", cfg.allocation.W.size() ? mat_json(cfg.allocation.W) : json(nullptr)}}},
        {"supervisor", {{"K", cfg.supervisor.K}, {"L", cfg.supervisor.L}, {"alpha", cfg.supervisor.alpha_w},
                        {"beta", cfg.supervisor.beta_w}, {"forget", cfg.supervisor.forget}, {"h", cfg.supervisor.h},
                        {"P", mat_json(cfg.supervisor.P)}}},
        {"disturbance", {{"mode", dmode},
                         {"bias", {cfg.disturbance.bias(0), cfg.disturbance.bias(1), cfg.disturbance.bias(2)}},
                         {"correlation_time", cfg.disturbance.correlation_time},
                         {"intensity", {cfg.disturbance.intensity(0), cfg.disturbance.intensity(1),
                                        cfg.disturbance.intensity(2)}}}},
        {"simulation", {{"dt", cfg.dt}, {"base_seed", cfg.base_seed}, {"seeds", cfg.seeds}}},
        {"trajectory", segs},
    };
}

/// 64-bit FNV-1a of the canonical JSON dump.
inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string s = to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace usv
