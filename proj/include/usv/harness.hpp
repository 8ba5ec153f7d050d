#pragma once

// Closed-loop experiment runner, integral-square-error metrics and the
// mode-by-seed comparison matrix, plus CSV/JSON export of run records.

#include "usv/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace usv {

enum class Mode { PBSSC, TransitOnly, SKOnly, RevOnly };

inline const std::vector<Mode>& all_modes() {
    static const std::vector<Mode> modes{Mode::PBSSC, Mode::TransitOnly, Mode::SKOnly, Mode::RevOnly};
    return modes;
}

inline const char* to_string(Mode m) {
    switch (m) {
        case Mode::PBSSC: return "pbssc";
        case Mode::TransitOnly: return "transit";
        case Mode::SKOnly: return "sk";
        case Mode::RevOnly: return "rev";
    }
    return "?";
}

inline Mode parse_mode(const std::string& s) {
    for (Mode m : all_modes()) {
        if (s == to_string(m)) return m;
    }
    throw ConfigError("unknown mode '" + s + "' (expected pbssc|transit|sk|rev)");
}

struct RunRow {
    double t = 0.0;
    VehicleState state;
    Vec3 eta_d = Vec3::Zero();
    int segment = 0;
    int sigma = 0;
    Vec3 tau = Vec3::Zero();       // controller request
    Vec3 tau_act = Vec3::Zero();   // wrench the thrusters deliver
    bool kill = false;
    std::map<int, double> mu;
    std::map<int, double> V;
    ActuatorCommand commands;
};

struct RunRecord {
    Mode mode = Mode::PBSSC;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    double dt = 0.1;
    std::vector<RunRow> rows;
    bool supervisor_failed = false;
};

inline std::vector<Candidate> default_candidates(const ExperimentConfig& cfg) {
    return {make_transit(cfg.vehicle, cfg.transit), make_station_keep(cfg.vehicle, cfg.station_keep),
            make_reverse(cfg.reverse)};
}

struct RunOptions {
    std::optional<VehicleState> initial;  // default: first reference pose, at rest
    std::optional<int> pin_sigma;         // PBSSC only: force sigma, estimator still runs
};

/// Runs one mode against the General-model plant for the configured
/// trajectory. Throws IntegrationBlowup naming the step and mode.
inline RunRecord run_experiment(const ExperimentConfig& cfg, Mode mode, std::uint64_t seed,
                                const RunOptions& opts = {}) {
    const ReferenceTrajectory traj = build_reference(cfg.segments, 1.0 / cfg.dt);
    const Allocator allocator(cfg.vehicle, cfg.allocation);
    Disturbance disturbance(cfg.disturbance, seed);

    RunRecord rec;
    rec.mode = mode;
    rec.seed = seed;
    rec.config_hash = config_hash(cfg);
    rec.dt = cfg.dt;

    std::vector<Candidate> candidates = default_candidates(cfg);
    std::optional<Supervisor> supervisor;
    Candidate* single = nullptr;
    if (mode == Mode::PBSSC) {
        supervisor.emplace(candidates, cfg.supervisor, cfg.vehicle, allocator);
        if (opts.pin_sigma) supervisor->pin(opts.pin_sigma);
    } else {
        const int id = mode == Mode::TransitOnly ? kTransitId : mode == Mode::SKOnly ? kStationKeepId : kReverseId;
        for (auto& c : candidates) {
            if (c.id == id) single = &c;
        }
    }

    VehicleState state;
    if (opts.initial) {
        state = *opts.initial;
    } else {
        const Vec3 eta0 = traj.samples.front().eta;
        state = VehicleState::from(eta0, Vec3::Zero(), 0.0);
    }
    state.t = 0.0;

    const std::size_t n = traj.samples.size();
    rec.rows.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const SampleView ref = sample(traj, state.t);
        RunRow row;
        row.t = state.t;
        row.state = state;
        row.eta_d = ref.current.eta;
        row.segment = ref.current.segment;

        ControlOutput out;
        AllocationPath path;
        if (supervisor) {
            SupervisorStep st = supervisor->step(state, traj, cfg.dt);
            out = st.output;
            path = st.path;
            row.sigma = st.sigma;
            row.mu = st.mu;
            row.V = st.V;
            if (st.failed) rec.supervisor_failed = true;
        } else {
            out = compute(single->controller, state, ref, cfg.dt);
            path = single->path;
            row.sigma = single->id;
        }
        row.tau = out.tau;
        row.kill = out.kill;
        row.commands = allocator.allocate(path, out);
        row.tau_act = allocator.wrench(row.commands);
        rec.rows.push_back(row);

        if (k + 1 < n) {
            const Vec3 d = disturbance.sample(cfg.dt);
            try {
                state = step(cfg.vehicle, ModelKind::General, state, row.tau_act, d, cfg.dt);
            } catch (const IntegrationBlowup& e) {
                throw IntegrationBlowup(std::string(e.what()) + " [step " + std::to_string(k) + ", mode " +
                                        to_string(mode) + "]");
            }
            state.t = static_cast<double>(k + 1) * cfg.dt;
        }
    }
    return rec;
}

struct Metrics {
    double Pi_r = 0.0;    // m^2 s
    double Pi_psi = 0.0;  // deg^2 s
};

inline double position_error_sq(const RunRow& r) { return (r.state.position() - r.eta_d.head<2>()).squaredNorm(); }

inline double heading_error_deg_sq(const RunRow& r) {
    const double e = rad2deg(wrap_angle(r.state.psi - r.eta_d(2)));
    return e * e;
}

/// Trapezoidal integrals over rows [first, last].
inline Metrics metrics(const RunRecord& rec, std::size_t first = 0, std::optional<std::size_t> last = std::nullopt) {
    Metrics m;
    if (rec.rows.size() < 2) return m;
    const std::size_t end = std::min(last.value_or(rec.rows.size() - 1), rec.rows.size() - 1);
    for (std::size_t k = first; k < end; ++k) {
        const RunRow& a = rec.rows[k];
        const RunRow& b = rec.rows[k + 1];
        const double h = b.t - a.t;
        m.Pi_r += 0.5 * h * (position_error_sq(a) + position_error_sq(b));
        m.Pi_psi += 0.5 * h * (heading_error_deg_sq(a) + heading_error_deg_sq(b));
    }
    return m;
}

// Comparison matrix -----------------------------------------------------------

struct ComparisonEntry {
    Mode mode = Mode::PBSSC;
    std::uint64_t seed = 0;
    std::optional<Metrics> metrics;  // empty when the run failed
    std::string error;
};

struct Comparison {
    std::vector<std::uint64_t> seeds;
    std::vector<ComparisonEntry> entries;
    std::map<Mode, Metrics> average;
    int seeds_passing = 0;
    bool average_passes = false;
    bool passed = false;

    const ComparisonEntry* find(Mode m, std::uint64_t seed) const {
        for (const auto& e : entries) {
            if (e.mode == m && e.seed == seed) return &e;
        }
        return nullptr;
    }
};

/// PBSSC beats every individual controller in heading and is within
/// `r_margin` of the best individual in position.
inline bool pbssc_ordering_holds(const std::map<Mode, Metrics>& m, double r_margin = 1.1) {
    if (!m.count(Mode::PBSSC)) return false;
    const Metrics& p = m.at(Mode::PBSSC);
    double best_r = std::numeric_limits<double>::infinity();
    for (Mode mode : {Mode::TransitOnly, Mode::SKOnly, Mode::RevOnly}) {
        if (!m.count(mode)) continue;
        if (!(p.Pi_psi < m.at(mode).Pi_psi)) return false;
        best_r = std::min(best_r, m.at(mode).Pi_r);
    }
    return p.Pi_r <= r_margin * best_r;
}

inline Comparison compare(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw ConfigError("compare: at least one seed is required");
    Comparison cmp;
    cmp.seeds = seeds;
    std::map<Mode, int> counts;
    for (std::uint64_t seed : seeds) {
        std::map<Mode, Metrics> per_seed;
        for (Mode mode : all_modes()) {
            ComparisonEntry e{mode, seed, std::nullopt, {}};
            try {
                e.metrics = metrics(run_experiment(cfg, mode, seed));
                per_seed[mode] = *e.metrics;
                cmp.average[mode].Pi_r += e.metrics->Pi_r;
                cmp.average[mode].Pi_psi += e.metrics->Pi_psi;
                ++counts[mode];
            } catch (const Error& err) {
                e.error = err.what();
            }
            cmp.entries.push_back(e);
        }
        if (per_seed.size() == all_modes().size() && pbssc_ordering_holds(per_seed)) ++cmp.seeds_passing;
    }
    for (auto& [mode, m] : cmp.average) {
        m.Pi_r /= counts[mode];
        m.Pi_psi /= counts[mode];
    }
    cmp.average_passes = cmp.average.size() == all_modes().size() && pbssc_ordering_holds(cmp.average);
    const int needed = static_cast<int>(seeds.size()) - (seeds.size() >= 5 ? 1 : 0);
    cmp.passed = cmp.average_passes && cmp.seeds_passing >= needed;
    return cmp;
}

// Export ----------------------------------------------------------------------

namespace detail {

inline std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Writes `content` to `path` through a temporary file and a rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace detail

inline std::vector<std::string> csv_columns(const RunRecord& rec) {
    std::vector<std::string> cols{"t", "x", "y", "psi", "u", "v", "r", "x_d", "y_d", "psi_d", "segment", "sigma",
                                  "X", "Y", "N", "kill", "X_act", "Y_act", "N_act"};
    for (int q : {kTransitId, kStationKeepId, kReverseId}) cols.push_back("mu_" + std::to_string(q));
    for (int q : {kTransitId, kStationKeepId, kReverseId}) cols.push_back("V_" + std::to_string(q));
    const std::size_t nthr = rec.rows.empty() ? 0 : rec.rows.front().commands.size();
    for (std::size_t i = 1; i <= nthr; ++i) {
        cols.push_back("thrust_" + std::to_string(i));
        cols.push_back("azimuth_" + std::to_string(i));
    }
    return cols;
}

/// One header line then one row per step. mu/V are empty outside PBSSC.
inline std::string to_csv(const RunRecord& rec) {
    using detail::num;
    std::string out;
    const auto cols = csv_columns(rec);
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
    out += '\n';
    for (const RunRow& r : rec.rows) {
        const auto& s = r.state;
        out += num(r.t) + ',' + num(s.x) + ',' + num(s.y) + ',' + num(s.psi) + ',' + num(s.u) + ',' + num(s.v) + ',' +
               num(s.r) + ',' + num(r.eta_d(0)) + ',' + num(r.eta_d(1)) + ',' + num(r.eta_d(2)) + ',' +
               std::to_string(r.segment) + ',' + std::to_string(r.sigma) + ',' + num(r.tau(0)) + ',' +
               num(r.tau(1)) + ',' + num(r.tau(2)) + ',' + (r.kill ? "1" : "0") + ',' + num(r.tau_act(0)) + ',' +
               num(r.tau_act(1)) + ',' + num(r.tau_act(2));
        for (const auto* m : {&r.mu, &r.V}) {
            for (int q : {kTransitId, kStationKeepId, kReverseId}) {
                out += ',';
                if (auto it = m->find(q); it != m->end()) out += num(it->second);
            }
        }
        for (const auto& c : r.commands) out += ',' + num(c.thrust) + ',' + num(c.azimuth);
        out += '\n';
    }
    return out;
}

inline json to_json(const Metrics& m) { return {{"Pi_r", m.Pi_r}, {"Pi_psi", m.Pi_psi}}; }

inline json to_json(const RunRecord& rec) {
    json rows = json::array();
    for (const RunRow& r : rec.rows) {
        json mu = json::object();
        json V = json::object();
        for (const auto& [q, v] : r.mu) mu[std::to_string(q)] = std::isfinite(v) ? json(v) : json(nullptr);
        for (const auto& [q, v] : r.V) V[std::to_string(q)] = std::isfinite(v) ? json(v) : json(nullptr);
        json cmds = json::array();
        for (const auto& c : r.commands) cmds.push_back({{"thrust", c.thrust}, {"azimuth", c.azimuth}});
        const auto& s = r.state;
        rows.push_back({{"t", r.t},
                        {"eta", {s.x, s.y, s.psi}},
                        {"nu", {s.u, s.v, s.r}},
                        {"eta_d", {r.eta_d(0), r.eta_d(1), r.eta_d(2)}},
                        {"segment", r.segment},
                        {"sigma", r.sigma},
                        {"tau", {r.tau(0), r.tau(1), r.tau(2)}},
                        {"tau_act", {r.tau_act(0), r.tau_act(1), r.tau_act(2)}},
                        {"kill", r.kill},
                        {"mu", mu},
                        {"V", V},
                        {"commands", cmds}});
    }
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(rec.config_hash));
    return {{"meta", {{"mode", to_string(rec.mode)}, {"seed", rec.seed}, {"config_hash", hash}, {"dt", rec.dt},
                      {"supervisor_failed", rec.supervisor_failed}}},
            {"metrics", to_json(metrics(rec))},
            {"rows", rows}};
}

inline std::string comparison_table(const Comparison& cmp) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%-8s %-8s %16s %18s\n", "mode", "seed", "Pi_r [m^2 s]", "Pi_psi [deg^2 s]");
    out += line;
    for (const auto& e : cmp.entries) {
        if (e.metrics) {
            std::snprintf(line, sizeof line, "%-8s %-8llu %16.3f %18.3f\n", to_string(e.mode),
                          static_cast<unsigned long long>(e.seed), e.metrics->Pi_r, e.metrics->Pi_psi);
        } else {
            std::snprintf(line, sizeof line, "%-8s %-8llu %16s %18s  (%s)\n", to_string(e.mode),
                          static_cast<unsigned long long>(e.seed), "failed", "failed", e.error.c_str());
        }
        out += line;
    }
    out += "averaged over seeds:\n";
    for (Mode m : all_modes()) {
        if (!cmp.average.count(m)) continue;
        std::snprintf(line, sizeof line, "%-8s %-8s %16.3f %18.3f\n", to_string(m), "avg", cmp.average.at(m).Pi_r,
                      cmp.average.at(m).Pi_psi);
        out += line;
    }
    std::snprintf(line, sizeof line, "ordering: %d/%zu seeds, average %s -> %s\n", cmp.seeds_passing,
                  cmp.seeds.size(), cmp.average_passes ? "holds" : "fails", cmp.passed ? "PASS" : "FAIL");
    out += line;
    return out;
}

inline std::string comparison_csv(const Comparison& cmp) {
    using detail::num;
    std::string out = "mode,seed,Pi_r,Pi_psi\n";
    for (const auto& e : cmp.entries) {
        out += std::string(to_string(e.mode)) + ',' + std::to_string(e.seed) + ',';
        out += e.metrics ? num(e.metrics->Pi_r) + ',' + num(e.metrics->Pi_psi) : std::string(",");
        out += '\n';
    }
    for (Mode m : all_modes()) {
        if (!cmp.average.count(m)) continue;
        out += std::string(to_string(m)) + ",avg," + num(cmp.average.at(m).Pi_r) + ',' + num(cmp.average.at(m).Pi_psi) + '\n';
    }
    return out;
}

inline json to_json(const Comparison& cmp) {
    json entries = json::array();
    for (const auto& e : cmp.entries) {
        entries.push_back({{"mode", to_string(e.mode)},
                           {"seed", e.seed},
                           {"metrics", e.metrics ? to_json(*e.metrics) : json(nullptr)},
                           {"error", e.error}});
    }
    json avg = json::object();
    for (const auto& [m, v] : cmp.average) avg[to_string(m)] = to_json(v);
    return {{"entries", entries},
            {"average", avg},
            {"seeds_passing", cmp.seeds_passing},
            {"average_passes", cmp.average_passes},
            {"passed", cmp.passed}};
}

inline std::string trajectory_csv(const ReferenceTrajectory& traj) {
    using detail::num;
    std::string out = "t,segment,x_d,y_d,psi_d,xd_dot,yd_dot,psid_dot,xd_ddot,yd_ddot,psid_ddot\n";
    for (const auto& s : traj.samples) {
        out += num(s.t) + ',' + std::to_string(s.segment);
        for (const Vec3* v : {&s.eta, &s.eta_dot, &s.eta_ddot}) {
            for (int i = 0; i < 3; ++i) out += ',' + num((*v)(i));
        }
        out += '\n';
    }
    return out;
}

}  // namespace usv
