#include <catch_amalgamated.hpp>

#include <filesystem>

#include "mottsim/config.hpp"

using namespace mottsim;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

const char* kMinimal = R"(
circuit: {row: S14}
stimulus: |
  mode current
  dc t0=20us t1=100us amp=50uA
t_end: 100us
)";

}  // namespace

TEST_CASE("minimal config takes the row and defaults", "[config]") {
    const auto cfg = parse_config_text(kMinimal);
    CHECK(cfg.circuit.rl2 == 5e3);
    CHECK_THAT(cfg.t_end, WithinRel(100e-6, 1e-12));
    CHECK(cfg.onset == 0);
    CHECK(cfg.output_name == "run");
    CHECK(cfg.axes.empty());
    CHECK_FALSE(cfg.predicate);
    CHECK(cfg.run_spec().label == "run");
}

TEST_CASE("explicit circuit, device and solver sections", "[config]") {
    const auto cfg = parse_config_text(R"(
circuit:
  topology: tonic
  rl1: 118kOhm
  rl2: 118kOhm
  c1: 38.3fF
  c2: 38.3fF
  e1: 0.82V
  e2: 0.82V
  c_stray: 0
  device:
    material: vo2
    r_ch: 10nm
    l_ch: 10nm
    r_shunt: open
  device2: {material: {preset: nbo2, kappa: 4}}
stimulus: "dc t0=0 t1=1us amp=1.4uA"
t_end: 2us
solver: {rel_tol: 1e-7, min_step: 1e-19s, sample_steps: true}
analysis: {threshold: 0.1V, min_separation: 10ns}
seed: 17
output: {name: tiny, dir: out}
)");
    CHECK_THAT(cfg.circuit.c1, WithinRel(38.3e-15, 1e-12));
    CHECK_THAT(cfg.circuit.dev1.geo.r_ch, WithinRel(10e-9, 1e-12));
    CHECK_FALSE(cfg.circuit.dev1.geo.r_shunt);
    CHECK(cfg.circuit.dev2.mat.kappa == 4);
    CHECK(cfg.circuit.dev2.mat.dh_tr == presets::nbo2().dh_tr);
    CHECK(cfg.solver.rel_tol == 1e-7);
    CHECK(cfg.solver.sample_steps);
    CHECK_THAT(cfg.detection.min_separation, WithinRel(10e-9, 1e-12));
    CHECK(cfg.seed == 17);
    CHECK(cfg.output_name == "tiny");
    CHECK(cfg.output_dir == "out");
}

TEST_CASE("sweep axes", "[config]") {
    const auto cfg = parse_config_text(std::string(kMinimal) + R"(
sweep:
  axes:
    - {param: circuit.c1, from: 1nF, to: 100nF, count: 3, log: true}
    - {param: circuit.e12, values: [1.3V, 1.4V]}
)");
    REQUIRE(cfg.axes.size() == 2);
    CHECK_THAT(cfg.axes[0].values[1], WithinRel(10e-9, 1e-12));
    CHECK(cfg.axes[1].values.size() == 2);
    auto copy = cfg;
    set_parameter(copy, "circuit.e12", 1.3);
    CHECK(copy.circuit.e1 == 1.3);
    CHECK(copy.circuit.e2 == 1.3);
    CHECK_THROWS_AS(set_parameter(copy, "circuit.flux", 1), ConfigError);
}

TEST_CASE("predicate labels the run and must be single-run", "[config]") {
    const auto cfg = parse_config_text(std::string(kMinimal) + "predicate: tonic-spiking\n");
    CHECK(cfg.run_spec().label == "dc");
    CHECK_THAT(error_of(std::string(kMinimal) + "predicate: integrator\n"), ContainsSubstring("single-run"));
    CHECK_THAT(error_of(std::string(kMinimal) + "predicate: dancing\n"), ContainsSubstring("valid names"));
}

TEST_CASE("malformed configs name the key and position", "[config]") {
    CHECK_THAT(error_of("stimulus: x\nt_end: 1us\n"), ContainsSubstring("'circuit'"));
    CHECK_THAT(error_of(std::string(kMinimal) + "colour: red\n"), ContainsSubstring("config.colour (line 7"));
    CHECK_THAT(error_of("circuit: {row: S14, c1: 5V}\nstimulus: 'dc t0=0 t1=1us amp=1uA'\nt_end: 1us\n"),
               ContainsSubstring("circuit.c1 (line 1") && ContainsSubstring("expected a capacitance"));
    CHECK_THAT(error_of("circuit: {row: S14}\nstimulus: 'dc t0=0 t1=1us amp=1uA'\nt_end: 5 furlongs\n"),
               ContainsSubstring("t_end (line 3"));
    CHECK_THAT(error_of("circuit: {row: S99}\nstimulus: x\nt_end: 1us\n"), ContainsSubstring("S99"));
    CHECK_THAT(error_of("circuit: {row: S14}\nstimulus: 'dc t0=0 t1=1us amp=1uA'\nt_end: 1us\nonset: 2us\n"),
               ContainsSubstring("onset"));
    // voltage input needs a resistive input path
    CHECK_THAT(error_of("circuit: {row: S21}\nstimulus: 'dc t0=0 t1=1us amp=1V'\nt_end: 1us\n"),
               ContainsSubstring("rl1"));
    CHECK_THROWS_AS(parse_config_text("circuit: [unclosed\n"), ParseError);
    try {
        parse_config_text("circuit:\n  row: S14\n t_end: 1us\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THAT(error_of(std::string(kMinimal) + "sweep:\n  axes:\n    - {param: circuit.c1, from: 1nF, to: 2nF, count: 0}\n"),
               ContainsSubstring("count"));
    CHECK_THAT(error_of(std::string(kMinimal) + "solver: {rel_tol: -1}\n"), ContainsSubstring("tolerances"));
}

TEST_CASE("bundled sample configs load", "[config]") {
    int n = 0;
    for (const auto& f : std::filesystem::directory_iterator(MOTTSIM_SOURCE_DIR "/configs")) {
        if (f.path().extension() != ".yaml") continue;
        INFO(f.path());
        CHECK_NOTHROW(load_config(f.path().string()));
        ++n;
    }
    CHECK(n >= 5);
    CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("stimulus read from a protocol file next to the config", "[config]") {
    const auto cfg = load_config(MOTTSIM_SOURCE_DIR "/configs/resonator-s25.yaml");
    CHECK(parse_protocol(cfg.stimulus).segments.front().kind == SegmentKind::Zap);
    CHECK_THAT(error_of("circuit: {row: S14}\nstimulus: {file: missing.stim}\nt_end: 1us\n"),
               ContainsSubstring("stimulus.file"));
}
