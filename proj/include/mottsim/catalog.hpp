#pragma once

// Built-in behavior catalog: the experimental circuit rows and one named,
// predicate-checked experiment per spiking behavior.

#include <chrono>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mottsim/circuit.hpp"
#include "mottsim/predicates.hpp"
#include "mottsim/simulate.hpp"

namespace mottsim {

/// One row of the experimental circuit table, SI units. Absent rl1 marks a
/// capacitively coupled input; rl1 and cin together mark the mixed-mode input.
struct CircuitRow {
    std::string id;
    std::string behavior;
    std::optional<double> rl1;
    double rl2 = 0;
    double c1_min = 0;
    double c1_max = 0;  ///< c1 is a range for the tunable-burst row
    double c2 = 0;
    std::optional<double> cin;
    double v1 = 0;  ///< signed rail on X1
    double v2 = 0;
    std::string x1, x2;  ///< device labels, all mapped to the default device
};

inline const std::vector<CircuitRow>& circuit_rows() {
    constexpr double k = 1e3, n = 1e-9;
    static const std::vector<CircuitRow> rows = {
        {"S11", "All-or-nothing", 6 * k, 6 * k, 2 * n, 2 * n, 2 * n, {}, -1.35, 1.35, "5251-13", "5251-9"},
        {"S12", "Refractory period", 5 * k, 5 * k, 5 * n, 5 * n, 5 * n, {}, -1.6, 1.6, "5050-15", "5050-7"},
        {"S13", "Absolute & relative refractory periods", 6 * k, 6 * k, 4 * n, 4 * n, 1 * n, {}, -1.45, 1.45, "5352-1", "5252-13"},
        {"S14", "Tonic spike", 5 * k, 5 * k, 5 * n, 5 * n, 2 * n, {}, -1.5, 1.5, "5151-7", "5151-3"},
        {"S15", "Tonic burst", 10 * k, 10 * k, 5 * n, 30 * n, 0, {}, -1.85, 1.85, "5051-9", "5051-5"},
        {"4c", "Class 1 excitable", 5 * k, 5 * k, 5 * n, 5 * n, 5 * n, {}, -1.5, 1.5, "5151-7", "5151-3"},
        {"4b", "Class 2 excitable", 5 * k, 5 * k, 1 * n, 1 * n, 5 * n, {}, -1.5, 1.5, "5151-7", "5151-3"},
        {"S16", "Spike frequency adaptation (tonic)", 10 * k, 10 * k, 200 * n, 200 * n, 2 * n, {}, -1.4, 1.4, "5251-13", "5251-9"},
        {"S17", "Spike frequency adaptation (phasic)", {}, 9 * k, 4 * n, 4 * n, 1.2 * n, 9 * n, -1.6, 1.6, "5351-11", "5351-7"},
        {"S18", "Spike latency", 6 * k, 6 * k, 10 * n, 10 * n, 3 * n, {}, -1.5, 1.5, "5352-1", "5252-13"},
        {"S19", "Subthreshold oscillation", 5 * k, 5 * k, 2 * n, 2 * n, 3 * n, {}, -1.4, 1.4, "5350-11", "5350-7"},
        {"S20", "Integrator", 6 * k, 6 * k, 8.5 * n, 8.5 * n, 2 * n, {}, -1.4, 1.4, "5251-13", "5251-9"},
        {"S21", "Bistability", 0.0, 7 * k, 1.5 * n, 1.5 * n, 2 * n, {}, -1.58, 1.58, "5352-1", "5252-13"},
        {"S22", "Inhibition-induced spike", 6 * k, 6 * k, 6 * n, 6 * n, 2 * n, {}, -1.4, 1.4, "5251-13", "5251-9"},
        {"S23a", "Inhibition-induced burst", 6 * k, 6 * k, 35 * n, 35 * n, 0, {}, -1.4, 1.4, "5251-13", "5251-9"},
        {"S23b", "Inhibition-induced burst", 7 * k, 7 * k, 21 * n, 21 * n, 0, {}, -1.5, 1.5, "5049-3", "4949-15"},
        {"S24", "Excitation block", 6 * k, 6 * k, 0, 0, 2 * n, {}, -1.4, 1.4, "5251-13", "5251-9"},
        {"S25", "Resonator", 5 * k, 7 * k, 5 * n, 5 * n, 0, 5 * n, -1.5, 1.5, "5250-13", "5250-9"},
        {"S26", "Phasic spike", {}, 7 * k, 1 * n, 1 * n, 2 * n, 0.3 * n, -1.6, 1.6, "5352-1", "5252-13"},
        {"S27", "Phasic burst", {}, 7 * k, 4 * n, 4 * n, 0, 0.3 * n, -1.6, 1.6, "5352-1", "5252-13"},
        {"S28", "Rebound spike", {}, 5.9 * k, 0, 0, 1 * n, 0.3 * n, -1.5, 1.5, "5352-1", "5252-13"},
        {"S31", "Rebound burst", {}, 5.9 * k, 0, 0, 0.5 * n, 0.3 * n, -1.5, 1.5, "5352-1", "5252-13"},
        {"S32", "Threshold variability", {}, 5.9 * k, 0, 0, 0.5 * n, 0.3 * n, -1.5, 1.5, "5352-1", "5252-13"},
        {"S33", "Depolarizing after-potential", {}, 6 * k, 0.9 * n, 0.9 * n, 2 * n, 0.3 * n, -1.3, 1.3, "5352-1", "5252-13"},
        {"S34", "Accommodation", {}, 7 * k, 1 * n, 1 * n, 0, 0.3 * n, -1.68, 1.68, "5352-1", "5252-13"},
        {"S35", "Mixed mode", 240 * k, 9 * k, 4 * n, 4 * n, 1.2 * n, 1 * n, -1.6, 1.6, "5351-11", "5351-7"},
        {"S36", "Skipping", 7 * k, 7 * k, 1 * n, 1 * n, 1 * n, {}, -1.5, 1.5, "5149-11", "5149-7"},
    };
    return rows;
}

inline const CircuitRow& circuit_row(const std::string& id) {
    for (const auto& r : circuit_rows())
        if (r.id == id) return r;
    throw ConfigError("unknown circuit row '" + id + "'");
}

/// Stray capacitance added to both membrane capacitors when replicating a row.
inline constexpr double kRowStray = 1e-9;

/// Circuit for a table row with the default device on both sides.
/// `c1` overrides the row value (needed for the tunable-burst row).
inline NeuronCircuit circuit_from_row(const CircuitRow& row, const std::optional<double>& c1 = std::nullopt) {
    NeuronCircuit c;
    c.topology = !row.rl1 ? Topology::Phasic : row.cin ? Topology::Mixed : Topology::Tonic;
    c.rl1 = row.rl1;
    c.rl2 = row.rl2;
    c.c1 = c1.value_or(row.c1_min);
    c.c2 = row.c2;
    c.cin = row.cin;
    c.e1 = -row.v1;
    c.e2 = row.v2;
    c.c_stray = kRowStray;
    return c;
}

inline NeuronCircuit circuit_from_row(const std::string& id, const std::optional<double>& c1 = std::nullopt) {
    return circuit_from_row(circuit_row(id), c1);
}

enum class CatalogGroup { Shared, Tonic, Phasic, Mixed };

inline std::string_view to_string(CatalogGroup g) {
    switch (g) {
        case CatalogGroup::Shared: return "shared";
        case CatalogGroup::Tonic: return "tonic";
        case CatalogGroup::Phasic: return "phasic";
        case CatalogGroup::Mixed: return "mixed";
    }
    return "?";
}

struct CatalogEntry {
    std::string name;
    CatalogGroup group = CatalogGroup::Tonic;
    std::vector<std::string> rows;
    std::string protocol_notes;  ///< how the stimulus was reconstructed
    bool approx = false;         ///< some stimulus timing or amplitude was not quoted and is a choice
    std::vector<RunSpec> runs;
    std::function<predicates::Verdict(const predicates::Outcomes&)> predicate;
};

namespace detail {

inline std::string us(double seconds) {
    std::ostringstream os;
    os << seconds * 1e6 << "us";
    return os.str();
}

inline std::string val(double v, const char* unit) {
    std::ostringstream os;
    os << v << unit;
    return os.str();
}

inline std::string current_dc(double t0, double t1, double amp) {
    return "mode current\ndc t0=" + us(t0) + " t1=" + us(t1) + " amp=" + val(amp * 1e6, "uA") + "\n";
}

inline std::string voltage_dc(double t0, double t1, double amp) {
    return "mode voltage\ndc t0=" + us(t0) + " t1=" + us(t1) + " amp=" + val(amp, "V") + "\n";
}

inline std::string voltage_pulse(double t0, double width, double amp) {
    return "pulse t0=" + us(t0) + " width=" + us(width) + " amp=" + val(amp, "V") + "\n";
}

inline RunSpec make_run(std::string label, NeuronCircuit c, std::string protocol, double t_end, double onset) {
    RunSpec r;
    r.label = std::move(label);
    r.circuit = std::move(c);
    r.protocol = std::move(protocol);
    r.t_end = t_end;
    r.onset = onset;
    return r;
}

inline std::string tag(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace detail

/// Quoted input currents of capacitively coupled circuits become AWG voltages
/// through this gain.
inline constexpr double kIsolatorGain = 1e-4;

inline std::vector<CatalogEntry> behavior_catalog() {
    using namespace detail;
    namespace P = predicates;
    std::vector<CatalogEntry> cat;
    const double t_on = 20e-6;

    // ---------------------------------------------------------------- shared
    {
        CatalogEntry e{"all-or-nothing", CatalogGroup::Shared, {"S11"},
                       "10 us voltage pulses through R_L1 at 0.1, 0.15 (sub) and 0.25, 0.4 V (supra)", false, {},
                       P::all_or_nothing};
        for (double a : {0.1, 0.15})
            e.runs.push_back(make_run("sub@" + tag(a), circuit_from_row("S11"),
                                      "mode voltage\n" + voltage_pulse(t_on, 10e-6, a), 150e-6, t_on));
        for (double a : {0.25, 0.4})
            e.runs.push_back(make_run("supra@" + tag(a), circuit_from_row("S11"),
                                      "mode voltage\n" + voltage_pulse(t_on, 10e-6, a), 150e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"refractory-period", CatalogGroup::Shared, {"S12", "S13"},
                       "10 us voltage doublets at periods 20..150 us on the first row; 8 us pulses at 0.75 V followed by "
                       "an equal or a 1.5 V pulse on the second row",
                       true, {}, P::refractory_period};
        for (double period : {20e-6, 40e-6, 60e-6, 80e-6, 100e-6, 120e-6, 150e-6}) {
            const std::string proto = "mode voltage\ndoublet t0=" + us(t_on) + " width=10us interval=" + us(period) +
                                      " amp=0.5V\n";
            e.runs.push_back(make_run("doublet@" + tag(period * 1e6), circuit_from_row("S12"), proto,
                                      t_on + period + 150e-6, t_on));
        }
        for (double delay : {30e-6, 45e-6, 60e-6}) {
            for (const auto& [name, amp2] : {std::pair{"equal@", 0.75}, std::pair{"double@", 1.5}}) {
                const std::string proto = "mode voltage\ndoublet t0=" + us(t_on) + " width=8us interval=" + us(delay) +
                                          " amp=0.75V amp2=" + val(amp2, "V") + "\n";
                e.runs.push_back(make_run(name + tag(delay * 1e6), circuit_from_row("S13"), proto,
                                          t_on + delay + 150e-6, t_on));
            }
        }
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"spike-frequency-adaptation", CatalogGroup::Shared, {"S16", "S17"},
                       "sustained d.c. input: 60 uA for 4 ms on the tonic row, a 2 V step (200 uA equivalent) on the "
                       "phasic row",
                       true, {}, P::spike_frequency_adaptation};
        e.runs.push_back(make_run("tonic", circuit_from_row("S16"), current_dc(t_on, 4e-3, 60e-6), 4e-3, t_on));
        e.runs.push_back(make_run("phasic", circuit_from_row("S17"), voltage_dc(t_on, 300e-6, 2.0), 300e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"spike-latency", CatalogGroup::Shared, {"S18"},
                       "single 10 us voltage pulses through R_L1, amplitudes 0.30..0.375 V", true, {},
                       P::spike_latency};
        for (double a : {0.30, 0.32, 0.34, 0.35, 0.36, 0.37, 0.375})
            e.runs.push_back(make_run("pulse@" + tag(a), circuit_from_row("S18"),
                                      "mode voltage\n" + voltage_pulse(t_on, 10e-6, a), 120e-6, t_on));
        cat.push_back(std::move(e));
    }

    // ---------------------------------------------------------------- tonic
    {
        CatalogEntry e{"tonic-spiking", CatalogGroup::Tonic, {"S14"}, "d.c. input current of 50 uA for 600 us", true,
                       {}, P::tonic_spiking};
        e.runs.push_back(make_run("dc", circuit_from_row("S14"), current_dc(t_on, 620e-6, 50e-6), 620e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"tonic-bursting", CatalogGroup::Tonic, {"S15"},
                       "d.c. input current of 50 uA for 1 ms, C1 = 15 nF from the tunable range", true, {},
                       P::tonic_bursting};
        e.runs.push_back(make_run("dc", circuit_from_row("S15", 15e-9), current_dc(t_on, 1e-3, 50e-6), 1e-3, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"class-1-excitable", CatalogGroup::Tonic, {"4c"}, "input current ramp 0 to 150 uA over 1 ms",
                       true, {}, P::class1};
        e.runs.push_back(make_run("ramp", circuit_from_row("4c"),
                                  "mode current\nramp t0=20us t1=1020us from=0uA to=150uA\n", 1020e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"class-2-excitable", CatalogGroup::Tonic, {"4b"}, "input current ramp 0 to 150 uA over 1 ms",
                       true, {}, P::class2};
        e.runs.push_back(make_run("ramp", circuit_from_row("4b"),
                                  "mode current\nramp t0=20us t1=1020us from=0uA to=150uA\n", 1020e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"subthreshold-oscillations", CatalogGroup::Tonic, {"S19"},
                       "d.c. input current of 120 uA for 500 us", false, {}, P::subthreshold_oscillation};
        e.runs.push_back(make_run("dc", circuit_from_row("S19"), current_dc(t_on, 520e-6, 120e-6), 520e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"integrator", CatalogGroup::Tonic, {"S20"},
                       "0.5 V, 6 us voltage pulses: a pair 5 us apart, a pair 23 us apart, and a single pulse", false,
                       {}, P::integrator};
        const auto pair = [&](double gap) {
            return "mode voltage\ndoublet t0=" + us(t_on) + " width=6us interval=" + us(6e-6 + gap) + " amp=0.5V\n";
        };
        e.runs.push_back(make_run("close-pair", circuit_from_row("S20"), pair(5e-6), 150e-6, t_on));
        e.runs.push_back(make_run("distant-pair", circuit_from_row("S20"), pair(23e-6), 150e-6, t_on));
        e.runs.push_back(
            make_run("single", circuit_from_row("S20"), "mode voltage\n" + voltage_pulse(t_on, 6e-6, 0.5), 150e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"bistability", CatalogGroup::Tonic, {"S21"},
                       "0.85 V, 15 us pulses through a 0.1 mA/V isolator; the second pulse is scanned 100..200 us after "
                       "the first",
                       true, {}, P::bistability};
        const std::string head = "mode current\nisolator gain=0.1mA/V\n";
        e.runs.push_back(make_run("switch-on", circuit_from_row("S21"),
                                  head + "pulse t0=20us width=15us amp=0.85V\n", 520e-6, t_on));
        for (double d = 100; d <= 200; d += 10) {
            const std::string proto = head + "doublet t0=20us width=15us interval=" + tag(d) + "us amp=0.85V\n";
            e.runs.push_back(make_run("switch-off@" + tag(d), circuit_from_row("S21"), proto, 520e-6, t_on));
        }
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"inhibition-induced-spiking", CatalogGroup::Tonic, {"S22"},
                       "zero input versus a -90 uA d.c. input current for 600 us", false, {},
                       P::inhibition_induced_spiking};
        e.runs.push_back(make_run("no-input", circuit_from_row("S22"), "mode current\nsilence t0=0 t1=620us\n", 620e-6, t_on));
        e.runs.push_back(
            make_run("inhibitory-dc", circuit_from_row("S22"), current_dc(t_on, 620e-6, -90e-6), 620e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"inhibition-induced-bursting", CatalogGroup::Tonic, {"S23a"},
                       "zero input versus a -70 uA d.c. input current for 1.5 ms", false, {},
                       P::inhibition_induced_bursting};
        e.runs.push_back(make_run("no-input", circuit_from_row("S23a"), "mode current\nsilence t0=0 t1=1520us\n", 1520e-6, t_on));
        e.runs.push_back(
            make_run("inhibitory-dc", circuit_from_row("S23a"), current_dc(t_on, 1520e-6, -70e-6), 1520e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"excitation-block", CatalogGroup::Tonic, {"S24"}, "input current ramp 0 to 150 uA over 1 ms",
                       true, {}, P::excitation_block};
        e.runs.push_back(make_run("ramp", circuit_from_row("S24"),
                                  "mode current\nramp t0=20us t1=1020us from=0uA to=150uA\n", 1020e-6, t_on));
        cat.push_back(std::move(e));
    }

    // ---------------------------------------------------------------- phasic
    {
        CatalogEntry e{"phasic-spiking", CatalogGroup::Phasic, {"S26"},
                       "1 V d.c. voltage step (100 uA equivalent) held for 200 us", true, {}, P::phasic_spiking};
        e.runs.push_back(make_run("step", circuit_from_row("S26"), voltage_dc(t_on, 220e-6, 1.0), 220e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"phasic-bursting", CatalogGroup::Phasic, {"S27"},
                       "1 V d.c. voltage step (100 uA equivalent) held for 300 us", true, {}, P::phasic_bursting};
        e.runs.push_back(make_run("step", circuit_from_row("S27"), voltage_dc(t_on, 320e-6, 1.0), 320e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"rebound-spike", CatalogGroup::Phasic, {"S28"},
                       "inhibitory voltage pulses: -0.5 V for 30 us; amplitude scan -0.4/-0.5/-0.6 V at 30 us; "
                       "duration scan 30/20/10/5/4 us at -0.5 V",
                       false, {}, P::rebound_spike};
        const auto neg = [&](double width, double amp) {
            return "mode voltage\n" + voltage_pulse(t_on, width, amp);
        };
        e.runs.push_back(make_run("release", circuit_from_row("S28"), neg(30e-6, -0.5), 150e-6, t_on));
        for (double a : {-0.4, -0.5, -0.6})
            e.runs.push_back(make_run("amp@" + tag(a), circuit_from_row("S28"), neg(30e-6, a), 150e-6, t_on));
        for (double w : {30e-6, 20e-6, 10e-6, 5e-6, 4e-6})
            e.runs.push_back(make_run("width@" + tag(w * 1e6), circuit_from_row("S28"), neg(w, -0.5), 150e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"rebound-burst", CatalogGroup::Phasic, {"S31"}, "inhibitory voltage pulse of -0.6 V for 30 us",
                       true, {}, P::rebound_burst};
        e.runs.push_back(make_run("release", circuit_from_row("S31"),
                                  "mode voltage\n" + voltage_pulse(t_on, 30e-6, -0.6), 200e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"resonator", CatalogGroup::Phasic, {"S25"},
                       "0.6 V ZAP sweep 1 to 50 kHz over 2 ms; capacitive input (C_in in series with R_L1) versus the "
                       "same circuit with a purely resistive input",
                       true, {}, P::resonator};
        const std::string zap = "mode voltage\nzap t0=20us t1=2020us amp=0.6V f0=1kHz f1=50kHz\n";
        NeuronCircuit cap = circuit_from_row("S25");
        cap.topology = Topology::Phasic;
        cap.r_source = *cap.rl1;
        cap.rl1.reset();
        NeuronCircuit res = circuit_from_row("S25");
        res.topology = Topology::Tonic;
        res.cin.reset();
        e.runs.push_back(make_run("capacitive", cap, zap, 2020e-6, t_on));
        e.runs.push_back(make_run("resistive", res, zap, 2020e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"threshold-variability", CatalogGroup::Phasic, {"S32"},
                       "10 us voltage pulses of +0.3 V and -0.3 V alone, and -0.3 V immediately followed by +0.3 V",
                       true, {}, P::threshold_variability};
        e.runs.push_back(make_run("excitatory", circuit_from_row("S32"),
                                  "mode voltage\n" + voltage_pulse(t_on, 10e-6, 0.3), 150e-6, t_on));
        e.runs.push_back(make_run("inhibitory", circuit_from_row("S32"),
                                  "mode voltage\n" + voltage_pulse(t_on, 10e-6, -0.3), 150e-6, t_on));
        e.runs.push_back(make_run("inhibitory-then-excitatory", circuit_from_row("S32"),
                                  "mode voltage\n" + voltage_pulse(t_on, 10e-6, -0.3) +
                                      voltage_pulse(t_on + 10e-6, 10e-6, 0.3),
                                  150e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"depolarizing-after-potential", CatalogGroup::Phasic, {"S33"},
                       "d.c. voltage steps of 2, 3, 4.5 V (200, 300, 450 uA equivalent) and a 5 V step for the second "
                       "spike",
                       false, {}, P::depolarizing_after_potential};
        for (double a : {2.0, 3.0, 4.5})
            e.runs.push_back(make_run("step@" + tag(a), circuit_from_row("S33"), voltage_dc(t_on, 200e-6, a), 200e-6, t_on));
        e.runs.push_back(make_run("second-spike", circuit_from_row("S33"), voltage_dc(t_on, 200e-6, 5.0), 200e-6, t_on));
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e{"accommodation", CatalogGroup::Phasic, {"S34"},
                       "voltage ramps to 1.5 V (150 uA equivalent): over 200 us versus over 2 us, then held", true, {},
                       P::accommodation};
        const auto ramp = [&](double rise) {
            return "mode voltage\nramp t0=" + us(t_on) + " t1=" + us(t_on + rise) + " from=0V to=1.5V\ndc t0=" +
                   us(t_on + rise) + " t1=" + us(t_on + rise + 100e-6) + " amp=1.5V\n";
        };
        e.runs.push_back(make_run("slow-ramp", circuit_from_row("S34"), ramp(200e-6), t_on + 300e-6, t_on));
        e.runs.push_back(make_run("sharp-ramp", circuit_from_row("S34"), ramp(2e-6), t_on + 102e-6, t_on));
        cat.push_back(std::move(e));
    }

    // ---------------------------------------------------------------- mixed
    {
        CatalogEntry e{"mixed-mode", CatalogGroup::Mixed, {"S35"},
                       "10 V d.c. voltage step through C_in parallel to R_L1, held for 1 ms", true, {},
                       P::mixed_mode};
        e.runs.push_back(make_run("step", circuit_from_row("S35"), voltage_dc(t_on, 1020e-6, 10.0), 1020e-6, t_on));
        cat.push_back(std::move(e));
    }
    return cat;
}

inline const CatalogEntry& find_entry(const std::vector<CatalogEntry>& cat, const std::string& name) {
    for (const auto& e : cat)
        if (e.name == name) return e;
    std::string names;
    for (const auto& e : cat) names += (names.empty() ? "" : ", ") + e.name;
    throw ConfigError("unknown behavior '" + name + "'; valid names: " + names);
}

struct EntryResult {
    std::string name;
    predicates::Verdict verdict;
    predicates::Outcomes outcomes;
    double wall_seconds = 0;
    std::string error;  ///< solver or configuration failure; the verdict is then a fail
};

inline EntryResult run_entry(const CatalogEntry& entry, const SolverConfig& cfg = {}) {
    const auto start = std::chrono::steady_clock::now();
    EntryResult res;
    res.name = entry.name;
    try {
        for (const auto& spec : entry.runs) res.outcomes.push_back(simulate(spec, cfg));
        res.verdict = entry.predicate(res.outcomes);
    } catch (const std::exception& ex) {
        res.error = ex.what();
        res.verdict.pass = false;
        res.verdict.summary = "run failed";
        res.verdict.notes.push_back(ex.what());
    }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

}  // namespace mottsim
