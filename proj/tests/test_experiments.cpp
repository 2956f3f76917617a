#include <catch_amalgamated.hpp>

#include "mottsim/catalog.hpp"
#include "mottsim/experiments.hpp"

using namespace mottsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

RegimeCell cell(double c1, double c2, Regime r) {
    RegimeCell c;
    c.c1 = c1;
    c.c2 = c2;
    c.regime = r;
    return c;
}

RunOutcome outcome_with(std::vector<double> times, double onset = 0) {
    RunOutcome o;
    o.onset = onset;
    o.train.times = std::move(times);
    o.train.peaks.assign(o.train.times.size(), 1.0);
    return o;
}

}  // namespace

TEST_CASE("load line of the switching oscillator crosses only the negative-slope segment", "[experiments]") {
    const Device dev{presets::vo2(), presets::bare(10e-9, 50e-9)};
    const auto osc = switching_oscillator(dev);
    const auto ll = load_line_check(osc);
    REQUIRE_FALSE(ll.crossings.empty());
    CHECK(ll.oscillation_predicted);
    for (const auto& x : ll.crossings) CHECK(x.on_ndr);

    // a stiff, low supply rests on the insulating branch
    auto stiff = osc;
    stiff.e1 = 0.3 * threshold_voltage(dev);
    stiff.rl1 = 0.1 * *osc.rl1;
    const auto rest = load_line_check(stiff);
    CHECK_FALSE(rest.oscillation_predicted);
    CHECK_THROWS_AS(load_line_check(circuit_from_row("S14")), ConfigError);
}

TEST_CASE("regime classification of synthetic trains", "[experiments]") {
    CHECK(classify_regime(outcome_with({})) == Regime::Quiescent);
    std::vector<double> bursty;
    for (int b = 0; b < 4; ++b)
        for (int k = 0; k < 3; ++k) bursty.push_back(100e-6 * b + 2e-6 * k);
    CHECK(classify_regime(outcome_with(bursty)) == Regime::Class1Bursting);
    // spikes before the onset are ignored
    CHECK(classify_regime(outcome_with({1e-6, 2e-6}, 10e-6)) == Regime::Quiescent);
}

TEST_CASE("regime map structure checks", "[experiments]") {
    RegimeMap m;
    m.c1_values = {1, 2, 4};
    m.c2_values = {1, 2, 4};
    for (double a : m.c1_values)
        for (double b : m.c2_values) {
            const double ratio = b / a;
            const Regime r = ratio < 0.4 ? Regime::Class1Bursting : ratio > 1 ? Regime::Class2Spiking : Regime::Class1Spiking;
            m.cells.push_back(cell(a, b, r));
        }
    const auto s = regime_structure(m);
    CHECK(s.class2_cells == 3);
    CHECK(s.bursting_cells == 1);
    CHECK(s.class2_only_above_diagonal);
    CHECK(s.bursting_below_boundary);
    REQUIRE(s.boundary_ratio);
    CHECK(*s.boundary_ratio > 0.25);
    CHECK(*s.boundary_ratio < 0.5);

    m.cells[0].regime = Regime::Class2Spiking;  // on the diagonal
    CHECK_FALSE(regime_structure(m).class2_only_above_diagonal);
    m.cells[2].regime = Regime::Class1Bursting;  // C2/C1 = 4
    CHECK_FALSE(regime_structure(m).bursting_below_boundary);
}

TEST_CASE("power at a spike rate", "[experiments]") {
    const PowerBounds pb{1e-6, 4e-6};
    const auto p = power_at_rate(pb, 0.1e-12, 100e6);
    CHECK_THAT(p.dynamic, WithinRel(10e-6, 1e-12));
    CHECK_THAT(p.total_lower, WithinRel(11e-6, 1e-12));
    CHECK_THAT(p.total_upper, WithinRel(14e-6, 1e-12));
    CHECK_THAT(p.static_share_upper, WithinRel(4.0 / 14.0, 1e-12));
    const double f = crossover_rate(pb.upper, 0.1e-12);
    CHECK_THAT(power_at_rate(pb, 0.1e-12, f).static_share_upper, WithinRel(0.1, 1e-12));
}

TEST_CASE("scaled neuron follows the design ratios", "[experiments]") {
    const auto geo = presets::bare(10e-9, 10e-9);
    const auto n = scaled_neuron(geo, 1e-12);
    const double r_ins = DeviceBranch(Device{presets::vo2(), geo}).resistance(kStateFloor);
    CHECK_THAT(n.v_th, WithinAbs(0.725, 0.005));
    CHECK_THAT(n.circuit.rl2, WithinRel(0.37 * r_ins, 1e-12));
    CHECK_THAT(n.circuit.e1, WithinRel(1.13 * n.v_th, 1e-12));
    CHECK_THAT(n.drive, WithinRel(0.2 * n.circuit.e1 / n.circuit.rl2, 1e-12));
    CHECK_NOTHROW(n.circuit.validate());
}

TEST_CASE("spike energy grows with membrane capacitance", "[experiments][slow]") {
    const auto geo = presets::bare(10e-9, 10e-9);
    const auto small = spike_energy(scaled_neuron(geo, 0.5e-12), 60);
    const auto large = spike_energy(scaled_neuron(geo, 2e-12), 60);
    INFO(small.error << " " << large.error);
    REQUIRE(small.valid);
    REQUIRE(large.valid);
    CHECK(small.energy > 0);
    CHECK(small.static_power > 0);
    // near-linear in C at this scale
    CHECK_THAT(large.energy / small.energy, WithinRel(4.0, 0.2));
    CHECK(large.rate < small.rate);
    CHECK_THROWS_AS(ee_area_curve(0, {1e-12}), ConfigError);
}

TEST_CASE("switching time shrinks with channel radius", "[experiments][slow]") {
    const auto pts = switching_sweep(presets::vo2(), {5e-9, 10e-9, 15e-9}, 50e-9);
    REQUIRE(pts.size() == 3);
    for (const auto& p : pts) {
        INFO(p.r_ch << " " << p.error);
        REQUIRE(p.rise_time);
    }
    CHECK(*pts[0].rise_time < *pts[1].rise_time);
    CHECK(*pts[1].rise_time < *pts[2].rise_time);
    CHECK(*pts[0].rise_time < 1e-12);
}

TEST_CASE("noisy drive below the firing onset skips cycles", "[experiments][slow]") {
    const auto c = circuit_from_row("S36");
    const auto lv = skipping_level(c, 18.4e-6, 15e-6, 2e-3, 1);
    REQUIRE(lv.train.size() >= 10);
    REQUIRE(lv.fundamental);
    CHECK(*lv.fundamental > 15e-6);
    CHECK(*lv.fundamental < 30e-6);
    CHECK(lv.dropouts > 0);
    for (double m : mode_multiples(lv)) CHECK(m >= 0.85);
    // the same seed reproduces the train
    CHECK(skipping_level(c, 18.4e-6, 15e-6, 2e-3, 1).train.times == lv.train.times);
}
