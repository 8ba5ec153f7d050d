#include "catch_amalgamated.hpp"

#include "usv/config.hpp"

#include <filesystem>
#include <fstream>

using namespace usv;
using Catch::Approx;

TEST_CASE("defaults", "[config]") {
    const ExperimentConfig cfg;
    CHECK(cfg.dt == 0.1);
    CHECK(cfg.seeds == 5);
    CHECK(cfg.segments.size() == 5);
    CHECK(surge_attenuation(1.0, cfg.vehicle.N_max, cfg.allocation.beta) == Approx(0.5));
    CHECK(cfg.transit.N_clamp == cfg.vehicle.N_max);
}

TEST_CASE("parse with comments and overrides", "[config]") {
    const ExperimentConfig cfg = parse_config(R"({
        // vehicle tweaks
        "vehicle": {"m": 200, "thrusters": [{"lx": -2.0, "ly": -0.8}, {"lx": -2.0, "ly": 0.8}]},
        "transit": {"K_e": [100, 120], "delta": [-0.3, 0.1], "coupling_scale": 0.02},
        "station_keep": {"K_p": [[10, 0, 0], [0, 20, 0], [0, 0, 30]]},
        "reverse": {"k_psi": 123},
        "allocation": {"surge_fraction_at_max_yaw": 0.25, "W": [1, 2, 1, 2]},
        "supervisor": {"K": 20, "h": 0.3, "P": [1, 1, 4]},
        "disturbance": {"mode": "constant", "bias": [1, 0, 0]},
        "simulation": {"base_seed": 10, "seeds": 3},
        /* block comment */
        "trajectory": {"start": [0, 0], "segments": [
            {"kind": "hold", "heading": "E", "duration": 5},
            {"kind": "transit", "to": [0, 10], "speed": 1.0},
            {"kind": "hold", "heading": 90, "duration": 5}]}
    })");
    CHECK(cfg.vehicle.m == 200.0);
    CHECK(cfg.vehicle.thrusters[1].ly == 0.8);
    CHECK(cfg.transit.K_e(1, 1) == 120.0);
    CHECK(cfg.transit.delta == Vec2(-0.3, 0.1));
    CHECK(cfg.transit.coupling_scale == 0.02);
    CHECK(cfg.station_keep.K_p(1, 1) == 20.0);
    CHECK(cfg.reverse.k_psi == 123.0);
    CHECK(surge_attenuation(1.0, cfg.vehicle.N_max, cfg.allocation.beta) == Approx(0.25));
    CHECK(cfg.allocation.W(1, 1) == 2.0);
    CHECK(cfg.supervisor.K == 20);
    CHECK(cfg.supervisor.P(2, 2) == 4.0);
    CHECK(cfg.disturbance.mode == DisturbanceMode::Constant);
    CHECK(cfg.base_seed == 10);
    REQUIRE(cfg.segments.size() == 3);
    CHECK(cfg.segments[1].kind == SegmentKind::Transit);
    CHECK(cfg.segments[1].accel == 0.05);
    CHECK(cfg.segments[2].start(2) == Approx(kPi / 2));
}

TEST_CASE("config errors", "[config]") {
    CHECK_THROWS_AS(parse_config("{ nope"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"transit": {"delta": [0, 0.5]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"vehicle": {"m": -1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"supervisor": {"forget": 2}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"disturbance": {"mode": "storm"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"trajectory": {"segments": [{"kind": "loop"}]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"trajectory": {"segments": [{"kind": "hold", "heading": "NE", "duration": 1}]}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"simulation": {"dt": 0}})"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.jsonc"), ConfigError);
}

TEST_CASE("hash tracks every tunable", "[config]") {
    const ExperimentConfig base;
    CHECK(config_hash(base) == config_hash(ExperimentConfig{}));
    ExperimentConfig a = base;
    a.transit.coupling_scale *= 2;
    CHECK(config_hash(a) != config_hash(base));
    ExperimentConfig b = base;
    b.supervisor.h = 0.25;
    CHECK(config_hash(b) != config_hash(base));
    ExperimentConfig c = base;
    c.segments.pop_back();
    CHECK(config_hash(c) != config_hash(base));
}

TEST_CASE("shipped default config matches compiled defaults", "[config]") {
    const std::filesystem::path path = std::filesystem::path(USV_SOURCE_DIR) / "config" / "default.jsonc";
    REQUIRE(std::filesystem::exists(path));
    CHECK(to_json(load_config(path.string())) == to_json(ExperimentConfig{}));
}
