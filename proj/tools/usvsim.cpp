// usvsim: command-line runner for the supervisory switching experiments.
//
//   usvsim run        --mode pbssc|transit|sk|rev [--seed S]
//   usvsim compare    [--seeds N]
//   usvsim trajectory
//
// Common flags: --config PATH, --out DIR, --format csv|json.

#include "usv/harness.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <numeric>

namespace {

usv::ExperimentConfig resolve_config(const std::string& path) {
    return path.empty() ? usv::ExperimentConfig{} : usv::load_config(path);
}

std::string run_filename(const usv::RunRecord& rec, const std::string& format) {
    return std::string("run_") + usv::to_string(rec.mode) + "_seed" + std::to_string(rec.seed) + "." + format;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Twin-thruster USV supervisory switching simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string format = "csv";
    app.add_option("--config", config_path, "Experiment config (JSON, comments allowed)")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));

    auto* run = app.add_subcommand("run", "Run one controller mode on the reference trajectory");
    std::string mode_name = "pbssc";
    std::uint64_t seed = 1;
    run->add_option("--mode", mode_name, "pbssc|transit|sk|rev")->check(CLI::IsMember({"pbssc", "transit", "sk", "rev"}));
    run->add_option("--seed", seed, "Disturbance seed");

    auto* cmp = app.add_subcommand("compare", "Run every mode over N seeds and tabulate the metrics");
    int n_seeds = 0;
    cmp->add_option("--seeds", n_seeds, "Number of seeds (default: config value)")->check(CLI::PositiveNumber);

    auto* traj = app.add_subcommand("trajectory", "Export the reference trajectory");

    CLI11_PARSE(app, argc, argv);

    try {
        const usv::ExperimentConfig cfg = resolve_config(config_path);
        namespace fs = std::filesystem;

        if (run->parsed()) {
            const usv::RunRecord rec = usv::run_experiment(cfg, usv::parse_mode(mode_name), seed);
            const fs::path path = fs::path(out_dir) / run_filename(rec, format);
            usv::detail::write_atomic(path, format == "csv" ? usv::to_csv(rec) : usv::to_json(rec).dump(1) + "\n");
            const usv::Metrics m = usv::metrics(rec);
            std::printf("%s seed=%llu Pi_r=%.3f m^2 s Pi_psi=%.3f deg^2 s -> %s\n", usv::to_string(rec.mode),
                        static_cast<unsigned long long>(seed), m.Pi_r, m.Pi_psi, path.c_str());
            return rec.supervisor_failed ? 3 : 0;
        }

        if (cmp->parsed()) {
            const int n = n_seeds > 0 ? n_seeds : cfg.seeds;
            std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n));
            std::iota(seeds.begin(), seeds.end(), cfg.base_seed);
            const usv::Comparison result = usv::compare(cfg, seeds);
            std::cout << usv::comparison_table(result);
            const fs::path path = fs::path(out_dir) / ("compare." + format);
            usv::detail::write_atomic(path, format == "csv" ? usv::comparison_csv(result)
                                                            : usv::to_json(result).dump(1) + "\n");
            return result.passed ? 0 : 2;
        }

        if (traj->parsed()) {
            const usv::ReferenceTrajectory ref = usv::build_reference(cfg.segments, 1.0 / cfg.dt);
            const fs::path path = fs::path(out_dir) / ("trajectory." + format);
            if (format == "csv") {
                usv::detail::write_atomic(path, usv::trajectory_csv(ref));
            } else {
                usv::json rows = usv::json::array();
                for (const auto& s : ref.samples) {
                    rows.push_back({{"t", s.t},
                                    {"segment", s.segment},
                                    {"eta_d", {s.eta(0), s.eta(1), s.eta(2)}},
                                    {"eta_d_dot", {s.eta_dot(0), s.eta_dot(1), s.eta_dot(2)}},
                                    {"eta_d_ddot", {s.eta_ddot(0), s.eta_ddot(1), s.eta_ddot(2)}}});
                }
                usv::detail::write_atomic(path, rows.dump(1) + "\n");
            }
            std::printf("%zu samples, t_final=%.1f s -> %s\n", ref.size(), ref.t_final(), path.c_str());
            return 0;
        }
    } catch (const usv::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
