#pragma once

// Multi-run studies built on the catalog circuits: oscillation prediction,
// excitability regime maps, latency fits, energy and power scaling, noisy
// skipping and switching speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mottsim/analysis.hpp"
#include "mottsim/catalog.hpp"
#include "mottsim/quasi_static.hpp"
#include "mottsim/simulate.hpp"

namespace mottsim {

// ------------------------------------------------------------------ load line

struct LoadLineCrossing {
    double v = 0;
    double i = 0;
    bool on_ndr = false;
};

struct LoadLineResult {
    bool oscillation_predicted = false;
    std::vector<LoadLineCrossing> crossings;
};

/// Intersections of the (V_dc, R_L) load line with the force-current I-V of a
/// single-device oscillator. Oscillation is predicted when every
/// intersection lies on a negative-slope segment.
inline LoadLineResult load_line_check(const NeuronCircuit& circuit, double i_max = 0, double i_step = 0) {
    if (circuit.topology != Topology::PearsonAnson)
        throw ConfigError("load_line_check needs a pearson_anson circuit");
    circuit.validate();
    const double v_dc = circuit.e1, r_l = *circuit.rl1;
    if (i_max <= 0) i_max = 1.2 * v_dc / r_l;
    if (i_step <= 0) i_step = i_max / 20000;
    const auto curve = quasi_static_iv(circuit.dev1, DriveMode::ForceCurrent, {i_step, i_max, i_step});
    std::vector<IvPoint> up;
    for (const auto& p : curve.points)
        if (p.up) up.push_back(p);
    LoadLineResult res;
    auto gap = [&](const IvPoint& p) { return v_dc - p.i * r_l - p.v; };  // > 0: source pushes current up
    for (std::size_t k = 1; k < up.size(); ++k) {
        const double g0 = gap(up[k - 1]), g1 = gap(up[k]);
        if (g0 == 0 || (g0 > 0) != (g1 > 0)) {
            const double w = g0 == g1 ? 0.0 : g0 / (g0 - g1);
            LoadLineCrossing c;
            c.i = up[k - 1].i + w * (up[k].i - up[k - 1].i);
            c.v = up[k - 1].v + w * (up[k].v - up[k - 1].v);
            c.on_ndr = up[k].v < up[k - 1].v;
            res.crossings.push_back(c);
        }
    }
    res.oscillation_predicted =
        !res.crossings.empty() &&
        std::all_of(res.crossings.begin(), res.crossings.end(), [](const auto& c) { return c.on_ndr; });
    return res;
}

// ------------------------------------------------------------------ regime map

enum class Regime { Quiescent, SubthresholdOscillation, Class1Spiking, Class1Bursting, Class2Spiking, Class3, Failed };

inline std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::Quiescent: return "quiescent";
        case Regime::SubthresholdOscillation: return "subthreshold-oscillation";
        case Regime::Class1Spiking: return "class-1-spiking";
        case Regime::Class1Bursting: return "class-1-bursting";
        case Regime::Class2Spiking: return "class-2-spiking";
        case Regime::Class3: return "class-3";
        case Regime::Failed: return "failed";
    }
    return "?";
}

struct RegimeCell {
    double c1 = 0, c2 = 0;
    Regime regime = Regime::Failed;
    std::size_t spikes = 0;
    double spikes_per_burst = 0;
    bool at_rest = true;
    std::string error;
};

struct RegimeMap {
    std::vector<double> c1_values, c2_values;
    std::vector<RegimeCell> cells;  ///< row-major over c1, then c2
};

inline Regime classify_regime(const RunOutcome& o, double gap_factor = 3.0) {
    SpikeTrain t = o.train;
    t.times.clear();
    t.peaks.clear();
    for (std::size_t k = 0; k < o.train.size(); ++k)
        if (o.train.times[k] >= o.onset) {
            t.times.push_back(o.train.times[k]);
            t.peaks.push_back(o.train.peaks[k]);
        }
    if (t.empty()) {
        if (o.trace.empty()) return Regime::Quiescent;
        const double t_end = o.trace.t.back();
        const auto osc = detect_oscillation(o.trace.t, o.trace.v_k, o.onset + 0.5 * (t_end - o.onset), t_end,
                                            o.train.level - o.train.baseline);
        return osc.present ? Regime::SubthresholdOscillation : Regime::Quiescent;
    }
    const auto bm = burst_metrics(t, gap_factor);
    if (bm.bursts.size() >= 2 && bm.spikes_per_burst >= 2.0 && bm.bursts.size() < t.size())
        return Regime::Class1Bursting;
    switch (classify_excitability(fi_curve(o.trace, t))) {
        case Excitability::Class1: return Regime::Class1Spiking;
        case Excitability::Class2: return Regime::Class2Spiking;
        case Excitability::Class3: return Regime::Class3;
        case Excitability::NonExcitable: return Regime::Quiescent;
    }
    return Regime::Failed;
}

/// Ramped-current classification over a (C1, C2) grid of a tonic circuit.
/// Per-cell failures are recorded and the map is still returned.
inline RegimeMap regime_map(const NeuronCircuit& base, const std::vector<double>& c1_values,
                            const std::vector<double>& c2_values, const std::string& protocol, double t_end,
                            double onset, const SolverConfig& cfg = {},
                            const std::function<void(const RegimeCell&)>& progress = {}) {
    RegimeMap map{c1_values, c2_values, {}};
    for (double c1 : c1_values) {
        for (double c2 : c2_values) {
            RegimeCell cell;
            cell.c1 = c1;
            cell.c2 = c2;
            try {
                RunSpec spec;
                spec.label = "cell";
                spec.circuit = base;
                spec.circuit.c1 = c1;
                spec.circuit.c2 = c2;
                spec.protocol = protocol;
                spec.t_end = t_end;
                spec.onset = onset;
                const auto o = simulate(spec, cfg);
                cell.regime = classify_regime(o);
                cell.spikes = o.train.size();
                cell.at_rest = o.at_rest;
                SpikeTrain t = o.train;
                cell.spikes_per_burst = t.empty() ? 0.0 : burst_metrics(t).spikes_per_burst;
            } catch (const std::exception& ex) {
                cell.regime = Regime::Failed;
                cell.error = ex.what();
            }
            if (progress) progress(cell);
            map.cells.push_back(cell);
        }
    }
    return map;
}

struct RegimeStructure {
    std::size_t class2_cells = 0, class1_cells = 0, bursting_cells = 0, failed_cells = 0;
    bool class2_only_above_diagonal = true;  ///< every Class-2 cell has C2 > C1
    bool bursting_below_boundary = true;     ///< a ratio boundary < 1 separates bursting from the rest
    std::optional<double> boundary_ratio;    ///< C2/C1 midway between the highest bursting and lowest non-bursting ratio
};

/// Structural checks of a regime map: Class 2 above the diagonal, bursting
/// confined below some C2/C1 ratio under one.
inline RegimeStructure regime_structure(const RegimeMap& map) {
    RegimeStructure s;
    double max_burst_ratio = 0;
    double min_spiking_ratio = std::numeric_limits<double>::infinity();
    for (const auto& c : map.cells) {
        const double ratio = c.c2 / c.c1;
        switch (c.regime) {
            case Regime::Class2Spiking:
                ++s.class2_cells;
                if (!(c.c2 > c.c1)) s.class2_only_above_diagonal = false;
                min_spiking_ratio = std::min(min_spiking_ratio, ratio);
                break;
            case Regime::Class1Spiking:
                ++s.class1_cells;
                min_spiking_ratio = std::min(min_spiking_ratio, ratio);
                break;
            case Regime::Class1Bursting:
                ++s.bursting_cells;
                max_burst_ratio = std::max(max_burst_ratio, ratio);
                break;
            case Regime::Failed: ++s.failed_cells; break;
            default: break;
        }
    }
    if (s.bursting_cells > 0) {
        s.bursting_below_boundary = max_burst_ratio < 1.0 && max_burst_ratio < min_spiking_ratio;
        if (s.bursting_below_boundary)
            s.boundary_ratio = std::isfinite(min_spiking_ratio) ? std::sqrt(max_burst_ratio * min_spiking_ratio)
                                                                 : max_burst_ratio;
    }
    return s;
}

// ------------------------------------------------------------------ latency

struct LatencyStudy {
    std::vector<double> amplitudes;  ///< V
    std::vector<std::optional<double>> latencies;
    std::optional<LogFit> fit;
    std::vector<RunOutcome> outcomes;
};

/// Single pulses of increasing amplitude on one circuit; the fit uses every
/// amplitude that produced a spike.
inline LatencyStudy latency_study(const NeuronCircuit& circuit, const std::vector<double>& amplitudes,
                                  double width = 10e-6, double t_end = 120e-6, const SolverConfig& cfg = {}) {
    LatencyStudy s;
    const double onset = 20e-6;
    std::vector<double> v, lat;
    for (double a : amplitudes) {
        RunSpec spec;
        spec.label = "pulse@" + detail::tag(a);
        spec.circuit = circuit;
        spec.protocol = "mode voltage\n" + detail::voltage_pulse(onset, width, a);
        spec.t_end = t_end;
        spec.onset = onset;
        auto o = simulate(spec, cfg);
        const auto l = spike_latency(o.train, onset);
        s.amplitudes.push_back(a);
        s.latencies.push_back(l);
        if (l) {
            v.push_back(a);
            lat.push_back(*l);
        }
        s.outcomes.push_back(std::move(o));
    }
    if (v.size() >= 3) s.fit = fit_latency(v, lat);
    return s;
}

// ------------------------------------------------------------------ energy scaling

/// Tonic neuron scaled to a device geometry: both rails at `bias_ratio`
/// times the device threshold, both loads at `load_ratio` times the
/// insulating resistance, and a d.c. drive of `drive_ratio` times rail / load.
/// The default ratios copy the tonic-spike table row (1.5 V rails on a
/// 1.33 V device, 5 kOhm loads against a 13.4 kOhm insulating branch).
struct ScaledNeuronDesign {
    double bias_ratio = 1.13;
    double load_ratio = 0.37;
    double drive_ratio = 0.2;
    MaterialParams material = presets::vo2();
};

struct ScaledNeuron {
    NeuronCircuit circuit;
    double v_th = 0;
    double drive = 0;  ///< A
};

inline ScaledNeuron scaled_neuron(const DeviceGeometry& geo, double c, const ScaledNeuronDesign& d = {}) {
    ScaledNeuron n;
    const Device dev{d.material, geo};
    n.v_th = threshold_voltage(dev);
    const double r_ins = DeviceBranch(dev).resistance(kStateFloor);
    n.circuit.topology = Topology::Tonic;
    n.circuit.rl2 = d.load_ratio * r_ins;
    n.circuit.rl1 = n.circuit.rl2;
    n.circuit.c1 = n.circuit.c2 = c;
    n.circuit.e1 = n.circuit.e2 = d.bias_ratio * n.v_th;
    n.circuit.dev1 = n.circuit.dev2 = dev;
    n.drive = d.drive_ratio * n.circuit.e1 / n.circuit.rl2;
    return n;
}

/// Solver settings for fF-scale circuits: the thermal time constant of a
/// nanometre channel sits far below the default minimum step.
inline SolverConfig small_scale_config(double span, SolverConfig base = {}) {
    base.min_step = std::min(base.min_step, 1e-19);
    base.dense_interval = span / 20000;
    base.max_step = span / 200;
    return base;
}

struct SpikeEnergy {
    double capacitance = 0;
    double energy = 0;  ///< median dynamic supply energy per spike [J]
    double rate = 0;    ///< Hz
    std::size_t spikes = 0;
    double static_power = 0;  ///< supply power at rest [W]
    bool valid = false;
    std::string error;
};

inline SpikeEnergy spike_energy(const ScaledNeuron& n, double periods = 400, const SolverConfig& base = {}) {
    SpikeEnergy e;
    e.capacitance = n.circuit.c1;
    const double span = periods * n.circuit.rl2 * n.circuit.c1;
    try {
        RunSpec spec;
        spec.label = "energy";
        spec.circuit = n.circuit;
        spec.protocol = "mode current\ndc t0=0 t1=" + detail::us(span) + " amp=" + detail::val(n.drive * 1e6, "uA") + "\n";
        spec.t_end = span;
        spec.detection = SpikeDetection{}.scaled_for_capacitance(n.circuit.c1);
        const auto o = simulate(spec, small_scale_config(span, base));
        e.spikes = o.train.size();
        // static level: both rails feeding the resting leakage path
        e.static_power = supply_power(NeuronSystem(n.circuit), o.initial, 0.0, InputMode::Current);
        if (o.train.size() < 6) throw NumericalError("fewer than six spikes in the energy run", span);
        // skip the first half: start-up transient
        SpikeTrain late = o.train;
        const std::size_t skip = o.train.size() / 2;
        auto energies = periodic_spike_energies(o.trace, late, e.static_power, skip);
        e.energy = detail::median(energies);
        const double first = o.train.times[skip], last = o.train.times.back();
        e.rate = static_cast<double>(o.train.size() - 1 - skip) / (last - first);
        e.valid = true;
    } catch (const std::exception& ex) {
        e.error = ex.what();
    }
    return e;
}

struct EnergyScaling {
    std::vector<SpikeEnergy> points;
    std::optional<detail::LineFit> loglog;  ///< log10(E) against log10(C)
};

inline EnergyScaling energy_scaling(const DeviceGeometry& geo, const std::vector<double>& capacitances,
                                    const ScaledNeuronDesign& d = {}, const SolverConfig& base = {}) {
    EnergyScaling s;
    std::vector<double> x, y;
    for (double c : capacitances) {
        s.points.push_back(spike_energy(scaled_neuron(geo, c, d), 400, base));
        const auto& p = s.points.back();
        if (p.valid && p.energy > 0) {
            x.push_back(std::log10(c));
            y.push_back(std::log10(p.energy));
        }
    }
    if (x.size() >= 2) s.loglog = detail::fit_line(x, y);
    return s;
}

/// Log-spaced values from a to b inclusive.
inline std::vector<double> log_space(double a, double b, std::size_t n) {
    std::vector<double> v;
    for (std::size_t k = 0; k < n; ++k)
        v.push_back(a * std::pow(b / a, n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1)));
    return v;
}

// ------------------------------------------------------------------ static power

struct PowerAtRate {
    double rate = 0;
    double dynamic = 0;
    double total_lower = 0, total_upper = 0;
    double static_share_lower = 0, static_share_upper = 0;
};

/// Static bounds against dynamic power E_spike * rate.
inline PowerAtRate power_at_rate(const PowerBounds& bounds, double spike_energy, double rate) {
    PowerAtRate p;
    p.rate = rate;
    p.dynamic = spike_energy * rate;
    p.total_lower = p.dynamic + bounds.lower;
    p.total_upper = p.dynamic + bounds.upper;
    p.static_share_lower = bounds.lower / p.total_lower;
    p.static_share_upper = bounds.upper / p.total_upper;
    return p;
}

/// Rate at which the static share falls to `share`.
inline double crossover_rate(double static_power, double spike_energy, double share = 0.1) {
    return static_power * (1.0 - share) / (share * spike_energy);
}

// ------------------------------------------------------------------ skipping

struct SkippingLevel {
    double noise_pp = 0;  ///< A
    SpikeTrain train;
    IntervalStats intervals;
    std::optional<double> fundamental;
    double isi_cv = 0;
    std::vector<double> modes;
    std::size_t dropouts = 0;             ///< intervals longer than 1.5 fundamental ISIs
    std::size_t dropouts_with_bump = 0;   ///< of those, with a sub-threshold output excursion
    AmplitudeRecurrence amplitudes;
};

inline SkippingLevel skipping_level(const NeuronCircuit& circuit, double dc, double noise_pp, double t_end,
                                    std::uint64_t seed, const SolverConfig& base = {}, double bin = 1e-6,
                                    double mode_bin_fraction = 0.2) {
    SkippingLevel lv;
    lv.noise_pp = noise_pp;
    RunSpec spec;
    spec.label = "skipping";
    spec.circuit = circuit;
    spec.protocol = "mode current\n";
    if (noise_pp > 0)
        spec.protocol += "noise pp=" + detail::val(noise_pp * 1e6, "uA") + " hold=100ns seed=" + std::to_string(seed) + "\n";
    spec.protocol += "dc t0=0 t1=" + detail::us(t_end) + " amp=" + detail::val(dc * 1e6, "uA") + "\n";
    spec.t_end = t_end;
    SolverConfig cfg = base;
    cfg.dense_interval = std::max(cfg.dense_interval, 50e-9);
    const auto o = simulate(spec, cfg);
    // drop the start-up transient
    SpikeTrain t = o.train;
    const double t_cut = 0.05 * t_end;
    t.times.clear();
    t.peaks.clear();
    for (std::size_t k = 0; k < o.train.size(); ++k)
        if (o.train.times[k] >= t_cut) {
            t.times.push_back(o.train.times[k]);
            t.peaks.push_back(o.train.peaks[k]);
        }
    lv.train = t;
    lv.intervals = isi_and_jisi(t, bin);
    lv.fundamental = fundamental_isi(lv.intervals);
    lv.isi_cv = lv.intervals.coefficient_of_variation();
    // modes on a grid tied to the fundamental so long, sparse intervals still pile up
    if (lv.fundamental) {
        const double w = mode_bin_fraction * *lv.fundamental;
        for (double m : histogram_modes(make_histogram(lv.intervals.isi, w))) {
            std::vector<double> near;
            for (double x : lv.intervals.isi)
                if (std::abs(x - m) <= w) near.push_back(x);
            lv.modes.push_back(detail::median(near));
        }
    }
    lv.amplitudes = amplitude_recurrence(t);
    if (lv.fundamental) {
        const double low_floor = t.baseline + 0.005;
        for (std::size_t k = 1; k < t.size(); ++k) {
            const double gap = t.times[k] - t.times[k - 1];
            if (gap < 1.5 * *lv.fundamental) continue;
            ++lv.dropouts;
            // local maximum of the output below the spike level inside the gap
            const std::size_t a = o.trace.index_at(t.times[k - 1] + 0.5 * *lv.fundamental);
            const std::size_t b = o.trace.index_at(t.times[k] - 0.5 * *lv.fundamental);
            bool bump = false;
            for (std::size_t j = a + 1; j + 1 < b && !bump; ++j) {
                const double v = o.trace.v_k[j];
                bump = v > o.trace.v_k[j - 1] && v >= o.trace.v_k[j + 1] && v > low_floor && v < t.level;
            }
            if (bump) ++lv.dropouts_with_bump;
        }
    }
    return lv;
}

/// Largest noiseless d.c. drive in [low, high] that leaves the circuit
/// silent over `window`, to `resolution`. Skipping lives just below it.
inline double silent_drive_limit(const NeuronCircuit& circuit, double low, double high, double window = 1e-3,
                                 double resolution = 0.25e-6, const SolverConfig& cfg = {}) {
    auto fires = [&](double dc) {
        RunSpec spec;
        spec.label = "onset";
        spec.circuit = circuit;
        spec.protocol = detail::current_dc(0.0, window, dc);
        spec.t_end = window;
        const auto o = simulate(spec, cfg);
        return o.train.count_in(0.05 * window, window) > 0;
    };
    if (fires(low)) throw ConfigError("circuit already fires at the lower drive bound");
    if (!fires(high)) return high;
    while (high - low > resolution) {
        const double mid = 0.5 * (low + high);
        (fires(mid) ? high : low) = mid;
    }
    return low;
}

/// One skipping level per noise amplitude, all at the same d.c. drive and seed.
inline std::vector<SkippingLevel> skipping_study(const NeuronCircuit& circuit, double dc,
                                                 const std::vector<double>& noise_levels, double t_end,
                                                 std::uint64_t seed, const SolverConfig& cfg = {}) {
    std::vector<SkippingLevel> out;
    for (double pp : noise_levels) out.push_back(skipping_level(circuit, dc, pp, t_end, seed, cfg));
    return out;
}

/// Modes of the interval histogram expressed as multiples of the fundamental.
inline std::vector<double> mode_multiples(const SkippingLevel& lv) {
    std::vector<double> m;
    if (!lv.fundamental) return m;
    for (double x : lv.modes) m.push_back(x / *lv.fundamental);
    return m;
}

// ------------------------------------------------------------------ switching speed

struct SwitchingPoint {
    double r_ch = 0;
    std::optional<double> rise_time;
    std::string error;
};

/// Pearson-Anson oscillator around one device: the supply sits at twice the
/// device threshold and the load is chosen so the load line crosses the
/// negative-slope segment.
inline NeuronCircuit switching_oscillator(const Device& dev, double c = 22e-12) {
    const double v_th = threshold_voltage(dev);
    NeuronCircuit osc;
    osc.topology = Topology::PearsonAnson;
    osc.dev1 = osc.dev2 = dev;
    osc.c1 = c;
    osc.e1 = 2.0 * v_th;
    // load: the insulating branch current at threshold sets the scale
    const double r_ins = DeviceBranch(dev).resistance(kStateFloor);
    osc.rl1 = 0.5 * r_ins;
    for (int k = 0; k < 40; ++k) {
        const auto ll = load_line_check(osc);
        if (ll.oscillation_predicted) return osc;
        *osc.rl1 *= 0.7;
    }
    throw ConfigError("no load resistor found that makes the oscillator astable");
}

/// Mean 10-90 % rise of the device current over the oscillator's
/// insulating-to-metallic edges.
inline std::optional<double> oscillator_switching_time(const Device& dev, std::size_t cycles = 3,
                                                       const SolverConfig& base = {}) {
    const NeuronCircuit osc = switching_oscillator(dev);
    const NeuronSystem sys(osc);
    const double tau = *osc.rl1 * osc.c1;
    const double span = 3.0 * static_cast<double>(cycles) * tau;
    SolverConfig cfg = base;
    cfg.min_step = 1e-20;
    cfg.sample_steps = true;
    cfg.dense_interval = span / 2000;
    cfg.rel_tol = std::min(cfg.rel_tol, 1e-7);
    StimulusProgram none;
    const auto start = insulating_operating_point(sys, InputMode::Current);
    auto tr = integrate(sys, none, 0.0, span, start, cfg);
    return switching_time(tr);
}

inline std::vector<SwitchingPoint> switching_sweep(const MaterialParams& mat, const std::vector<double>& radii,
                                                   double length, const SolverConfig& base = {}) {
    std::vector<SwitchingPoint> out;
    for (double r : radii) {
        SwitchingPoint p;
        p.r_ch = r;
        try {
            p.rise_time = oscillator_switching_time(Device{mat, presets::bare(r, length)}, 3, base);
        } catch (const std::exception& ex) {
            p.error = ex.what();
        }
        out.push_back(p);
    }
    return out;
}

// ------------------------------------------------------------------ efficiency against area

struct EeAreaPoint {
    double area = 0;         ///< m^2, neuron area
    double capacitance = 0;  ///< per membrane capacitor [F]
    std::optional<double> spikes_per_joule;
};

/// Neuron area = capacitor area / `capacitor_share`; the capacitor area is
/// split equally between the two membrane capacitors.
inline std::vector<EeAreaPoint> ee_area_curve(double density, const std::vector<double>& areas,
                                              const DeviceGeometry& geo = presets::bare(10e-9, 10e-9),
                                              double capacitor_share = 0.8, const ScaledNeuronDesign& d = {},
                                              const SolverConfig& base = {}) {
    if (!(density > 0)) throw ConfigError("capacitance density must be positive");
    std::vector<EeAreaPoint> out;
    for (double a : areas) {
        EeAreaPoint p;
        p.area = a;
        p.capacitance = 0.5 * density * capacitor_share * a;
        const auto e = spike_energy(scaled_neuron(geo, p.capacitance, d), 400, base);
        if (e.valid && e.energy > 0) p.spikes_per_joule = 1.0 / e.energy;
        out.push_back(p);
    }
    return out;
}

}  // namespace mottsim
