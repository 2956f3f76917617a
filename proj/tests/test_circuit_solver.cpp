#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "mottsim/catalog.hpp"
#include "mottsim/circuit.hpp"
#include "mottsim/simulate.hpp"
#include "mottsim/solver.hpp"

using namespace mottsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Tonic neuron equations written out longhand: two device branches, two
// membrane nodes, coupling resistor, current input at the Na node.
std::array<double, 4> tonic_oracle(const NeuronCircuit& c, double v_na, double v_k, double u1, double u2, double i_in) {
    auto branch = [](const Device& d, double u, double v) {
        const double pi = std::numbers::pi;
        const double r_ins = d.mat.rho_ins * d.geo.l_ch / (pi * d.geo.r_ch * d.geo.r_ch);
        const double r_ch = r_ins / (1 + (d.mat.rho_ins / d.mat.rho_met - 1) * u * u);
        const double r_par = d.geo.r_shunt ? 1.0 / (1.0 / r_ch + 1.0 / *d.geo.r_shunt) : r_ch;
        const double i_b = v / (d.geo.r_e + r_par);
        const double i_ch = i_b * r_par / r_ch;
        const double vol = pi * d.geo.r_ch * d.geo.r_ch * d.geo.l_ch;
        const double l = std::log(u);
        const double cth = vol * (d.mat.cp * d.mat.dT * (1 - u * u + 2 * u * u * l) / (2 * u * l * l) + 2 * d.mat.dh_tr * u);
        const double q = 2 * pi * d.mat.kappa * d.geo.l_ch * d.mat.dT / std::log(1 / u);
        return std::pair{i_b, (i_ch * i_ch * r_ch - q) / cth};
    };
    const auto [i1, du1] = branch(c.dev1, u1, v_na + c.e1);
    const auto [i2, du2] = branch(c.dev2, u2, v_k - c.e2);
    const double i_c = (v_na - v_k) / c.rl2;
    return {(i_in - i1 - i_c) / (c.c1 + c.c_stray), (i_c - i2) / (c.c2 + c.c_stray), du1, du2};
}

}  // namespace

TEST_CASE("tonic right-hand side matches the longhand equations", "[circuit][property]") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> v(-2.0, 2.0), lu(std::log(kStateFloor), std::log(kStateCeil)),
        cur(-200e-6, 200e-6);
    for (const char* row : {"S14", "S15", "S19", "S36"}) {
        const auto c = circuit_from_row(row);
        const NeuronSystem sys(c);
        for (int k = 0; k < 100; ++k) {
            CircuitState s;
            s.v_na = v(gen);
            s.v_k = v(gen);
            s.u1 = std::exp(lu(gen));
            s.u2 = std::exp(lu(gen));
            const double i = cur(gen);
            const auto dx = rhs(sys, s, i, InputMode::Current);
            const auto o = tonic_oracle(c, s.v_na, s.v_k, s.u1, s.u2, i);
            CHECK_THAT(dx[kVNa], WithinRel(o[0], 1e-12));
            CHECK_THAT(dx[kVK], WithinRel(o[1], 1e-12));
            CHECK_THAT(dx[kU1], WithinRel(o[2], 1e-12));
            CHECK_THAT(dx[kU2], WithinRel(o[3], 1e-12));
        }
    }
}

TEST_CASE("instantaneous power balance holds in every topology", "[circuit][property]") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> v(-2.0, 2.0), lu(std::log(kStateFloor), std::log(kStateCeil)),
        in(-1.0, 1.0);
    for (const char* row : {"S14", "S26", "S35", "S25"}) {
        const auto c = circuit_from_row(row);
        const NeuronSystem sys(c);
        for (auto mode : {InputMode::Current, InputMode::Voltage}) {
            if (mode == InputMode::Voltage && c.topology == Topology::Tonic && !c.rl1) continue;
            for (int k = 0; k < 50; ++k) {
                StateVector x = StateVector::Zero();
                x[kVNa] = v(gen);
                x[kVK] = v(gen);
                x[kU1] = std::exp(lu(gen));
                x[kU2] = std::exp(lu(gen));
                if (c.has_aux_node()) x[kVAux] = v(gen);
                const double input = mode == InputMode::Current ? 1e-4 * in(gen) : in(gen);
                const auto dx = sys.derivative(x, input, mode);
                const auto o = sys.observe(x, input, mode);
                // dE_stored/dt from the node voltages
                double d_stored = c.c1_eff() * x[kVNa] * dx[kVNa] + c.c2_eff() * x[kVK] * dx[kVK];
                if (c.has_aux_node()) d_stored += *c.cin * (x[kVAux] - x[kVNa]) * (dx[kVAux] - dx[kVNa]);
                const double balance = o.supply_power + o.input_power - o.dissipation;
                const double scale = std::abs(o.supply_power) + std::abs(o.input_power) + std::abs(o.dissipation);
                CHECK_THAT(d_stored, WithinAbs(balance, 1e-10 * scale));
            }
        }
    }
}

TEST_CASE("circuit validation", "[circuit]") {
    auto c = circuit_from_row("S14");
    c.rl2 = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = circuit_from_row("S26");
    c.rl1 = 5e3;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = circuit_from_row("S35");
    c.cin.reset();
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = circuit_from_row("S21");
    CHECK_NOTHROW(c.validate());
    CHECK_THROWS_AS(NeuronSystem(c).check_mode(InputMode::Voltage), ConfigError);
}

TEST_CASE("linear RC response matches the matrix exponential", "[solver]") {
    // Unbiased tonic circuit under a small step: both channels stay at the
    // state floor, so the network is linear with constant branch resistances.
    auto c = circuit_from_row("S14");
    c.e1 = c.e2 = 0;
    const NeuronSystem sys(c);
    const double i_in = 1e-7;
    const auto program = parse_protocol("dc t0=0 t1=200us amp=0.1uA\n");
    SolverConfig cfg;
    cfg.rel_tol = 1e-8;
    cfg.abs_tol_voltage = 1e-12;
    const auto tr = integrate(sys, program, 0.0, 200e-6, CircuitState{}, cfg);
    REQUIRE(tr.u1.back() == Catch::Approx(kStateFloor));

    const double g1 = 1.0 / sys.branch1().resistance(kStateFloor), g2 = 1.0 / sys.branch2().resistance(kStateFloor);
    const double gl = 1.0 / c.rl2, c1 = c.c1_eff(), c2 = c.c2_eff();
    Eigen::Matrix2d a;
    a << -(g1 + gl) / c1, gl / c1, gl / c2, -(gl + g2) / c2;
    const Eigen::Vector2d b(i_in / c1, 0.0);
    const Eigen::Vector2d x_inf = -a.inverse() * b;
    Eigen::EigenSolver<Eigen::Matrix2d> es(a);
    const Eigen::Matrix2d vecs = es.eigenvectors().real();
    const Eigen::Vector2d lams = es.eigenvalues().real();
    const Eigen::Vector2d coef = vecs.inverse() * (-x_inf);
    for (double t : {5e-6, 20e-6, 80e-6, 199e-6}) {
        Eigen::Vector2d x = x_inf;
        for (int k = 0; k < 2; ++k) x += coef[k] * std::exp(lams[k] * t) * vecs.col(k);
        CHECK_THAT(tr.at(tr.v_na, t), WithinRel(x[0], 1e-4));
        CHECK_THAT(tr.at(tr.v_k, t), WithinRel(x[1], 1e-4));
    }
}

TEST_CASE("resting state is a fixed point", "[solver]") {
    for (const char* row : {"S14", "S19", "S26", "S35", "S36"}) {
        const NeuronSystem sys(circuit_from_row(row));
        const auto rest = resting_state(sys, InputMode::Current);
        const auto dx = rhs(sys, rest, 0.0, InputMode::Current);
        CHECK(std::abs(dx[kVNa]) < 1.0);  // V/s, against ~1e5 V/s spike slopes
        CHECK(std::abs(dx[kVK]) < 1.0);
    }
}

TEST_CASE("runs are deterministic, conserve energy and satisfy node current balance", "[solver][property]") {
    RunSpec spec;
    spec.circuit = circuit_from_row("S19");
    spec.protocol = "mode current\nnoise pp=10uA hold=100ns seed=2\ndc t0=20us t1=300us amp=60uA\n";
    spec.t_end = 300e-6;
    spec.onset = 20e-6;
    const auto a = simulate(spec);
    const auto b = simulate(spec);
    REQUIRE(a.train.size() >= 5);
    CHECK(a.trace.t == b.trace.t);
    CHECK(a.trace.v_k == b.trace.v_k);
    CHECK(a.trace.energy_residual() < 5e-3);

    // KCL at the K node: C2 dV_K/dt = i_coupling - i_branch2, with dV_K/dt from the model at each sample
    const NeuronSystem sys(spec.circuit);
    const NoiseTrack noise(a.program);
    double worst = 0;
    for (std::size_t k = 0; k < a.trace.size(); k += 7) {
        CircuitState s;
        s.v_na = a.trace.v_na[k];
        s.v_k = a.trace.v_k[k];
        s.u1 = a.trace.u1[k];
        s.u2 = a.trace.u2[k];
        const double in = a.trace.input[k];
        const auto dx = rhs(sys, s, in, InputMode::Current);
        const auto o = sys.observe(s.to_vector(), in, InputMode::Current);
        const double i_c = (s.v_na - s.v_k) / spec.circuit.rl2;
        const double kcl_k = spec.circuit.c2_eff() * dx[kVK] - (i_c + o.branch2);
        const double kcl_na = spec.circuit.c1_eff() * dx[kVNa] - (in - o.branch1 - i_c);
        const double scale = std::abs(i_c) + std::abs(o.branch1) + std::abs(o.branch2) + std::abs(in) + 1e-12;
        worst = std::max({worst, std::abs(kcl_k) / scale, std::abs(kcl_na) / scale});
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("first spike time converges under tolerance halving", "[solver][property]") {
    RunSpec spec;
    spec.circuit = circuit_from_row("S19");
    spec.protocol = "mode current\ndc t0=20us t1=200us amp=60uA\n";
    spec.t_end = 200e-6;
    const auto rep = convergence_report(
        [&](double s) { return simulate(spec, SolverConfig{}.scaled(s)).train; }, {1.0, 0.5, 0.25, 0.125});
    REQUIRE(rep.spiking);
    CHECK(rep.converged);
    CHECK(*rep.rows.front().drift < 1e-3);
}

TEST_CASE("solver config validation and step-underflow reporting", "[solver]") {
    SolverConfig bad;
    bad.rel_tol = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = SolverConfig{};
    bad.min_step = 1e-6;
    bad.max_step = 1e-7;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    // nanoscale channels need steps far below the default floor
    NeuronCircuit c;
    c.rl1 = c.rl2 = 118e3;
    c.c1 = c.c2 = 38e-15;
    c.e1 = c.e2 = 0.82;
    c.dev1 = c.dev2 = Device{presets::vo2(), presets::bare(10e-9, 10e-9)};
    const NeuronSystem sys(c);
    const auto program = parse_protocol("dc t0=0 t1=1us amp=2uA\n");
    SolverConfig coarse;
    coarse.min_step = 1e-12;
    CHECK_THROWS_AS(integrate(sys, program, 0.0, 1e-6, insulating_operating_point(sys), coarse), NumericalError);
}
