#pragma once

// Experiment configuration files (YAML). Quantities are strings with SI
// prefixes and units ("5kOhm", "2nF", "620us") or plain numbers in SI base
// units.
//
//   circuit:
//     row: S14                  # start from a table row, then override
//     topology: tonic           # tonic | phasic | mixed | pearson_anson
//     rl1: 5kOhm
//     rl2: 5kOhm
//     c1: 5nF
//     c2: 5nF
//     cin: 0.3nF
//     c_stray: 2nF
//     e1: 1.5V                  # magnitude of the negative rail
//     e2: 1.5V
//     r_source: 50Ohm
//     device:                   # both devices; device1 / device2 override one
//       material: vo2-table2    # or an inline map of material constants
//       geometry: crossbar-100nm
//       r_ch: 56nm
//       l_ch: 100nm
//       r_e: 325Ohm
//       r_shunt: 15kOhm
//   stimulus: |
//     mode current
//     dc t0=20us t1=620us amp=50uA
//   # or: stimulus: {file: tonic.stim}, relative to the config file
//   t_end: 620us
//   onset: 20us
//   solver: {rel_tol: 1e-6, abs_tol_voltage: 1e-9, abs_tol_state: 1e-9,
//            max_step: 0, min_step: 1e-13s, dense_interval: 10ns, sample_steps: false}
//   analysis: {threshold: 0.3V, min_separation: 2us, baseline: 0V}
//   predicate: tonic-spiking    # optional catalog predicate applied to the run
//   seed: 1
//   output: {dir: out, name: run}
//   sweep:                      # only for `sweep`; at most two axes
//     axes:
//       - {param: circuit.c1, values: [1nF, 2nF]}
//       - {param: circuit.c2, from: 1nF, to: 10nF, count: 5, log: true}

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "mottsim/catalog.hpp"
#include "mottsim/circuit.hpp"
#include "mottsim/device.hpp"
#include "mottsim/error.hpp"
#include "mottsim/simulate.hpp"
#include "mottsim/solver.hpp"
#include "mottsim/units.hpp"

namespace mottsim {

struct SweepAxis {
    std::string param;  ///< dotted key, e.g. circuit.c1
    std::vector<double> values;
};

struct ExperimentConfig {
    NeuronCircuit circuit;
    std::string stimulus;
    double t_end = 0;
    double onset = 0;
    SolverConfig solver;
    SpikeDetection detection;
    std::optional<std::string> predicate;
    std::uint64_t seed = 0;
    std::string output_dir;
    std::string output_name = "run";
    std::vector<SweepAxis> axes;

    /// The run as a RunSpec. With a predicate attached the run carries the
    /// label that predicate looks up.
    [[nodiscard]] RunSpec run_spec() const {
        RunSpec spec;
        spec.label = predicate ? find_entry(behavior_catalog(), *predicate).runs.front().label : output_name;
        spec.circuit = circuit;
        spec.protocol = stimulus;
        spec.t_end = t_end;
        spec.onset = onset;
        spec.detection = detection;
        spec.run_index = seed;
        return spec;
    }
};

namespace presets {

inline MaterialParams material(const std::string& name) {
    if (name == "vo2-table2" || name == "vo2") return vo2();
    if (name == "vo2-table1") return vo2_energetics();
    if (name == "nbo2-table1" || name == "nbo2") return nbo2();
    throw ConfigError("unknown material preset '" + name + "' (vo2-table2, vo2-table1, nbo2-table1)");
}

inline DeviceGeometry geometry(const std::string& name) {
    if (name == "crossbar-100nm") return crossbar_100nm();
    throw ConfigError("unknown geometry preset '" + name + "' (crossbar-100nm)");
}

}  // namespace presets

namespace detail {

inline std::string where(const YAML::Node& n, const std::string& key) {
    const auto m = n.Mark();
    if (m.is_null()) return key;
    return key + " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
}

/// Quantity of the given dimension; bare numbers are taken as SI base units.
inline double quantity(const YAML::Node& n, const std::string& key, units::Dim dim) {
    if (!n.IsScalar()) throw ConfigError(where(n, key) + ": expected a scalar quantity");
    const auto text = n.Scalar();
    const auto q = units::parse_quantity(text);
    if (!q) throw ConfigError(where(n, key) + ": cannot parse quantity '" + text + "'");
    if (q->dim != units::Dim::None && q->dim != dim)
        throw ConfigError(where(n, key) + ": '" + text + "' is a " + std::string(units::to_string(q->dim)) +
                          ", expected a " + std::string(units::to_string(dim)));
    return q->value;
}

inline double number(const YAML::Node& n, const std::string& key) { return quantity(n, key, units::Dim::None); }

template <class T>
T scalar_as(const YAML::Node& n, const std::string& key) {
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(where(n, key) + ": wrong type");
    }
}

inline void reject_unknown(const YAML::Node& map, const std::string& section, std::initializer_list<const char*> known) {
    if (!map.IsMap()) throw ConfigError(where(map, section) + ": expected a mapping");
    for (const auto& kv : map) {
        const auto k = kv.first.Scalar();
        bool ok = false;
        for (const char* name : known) ok = ok || k == name;
        if (!ok) throw ConfigError(where(kv.first, section + "." + k) + ": unknown key");
    }
}

inline MaterialParams parse_material(const YAML::Node& n, const std::string& key) {
    if (n.IsScalar()) return presets::material(n.Scalar());
    reject_unknown(n, key, {"preset", "cp", "dh_tr", "kappa", "rho_met", "rho_ins", "dT", "name"});
    MaterialParams m = n["preset"] ? presets::material(n["preset"].Scalar()) : MaterialParams{};
    if (n["cp"]) m.cp = number(n["cp"], key + ".cp");
    if (n["dh_tr"]) m.dh_tr = number(n["dh_tr"], key + ".dh_tr");
    if (n["kappa"]) m.kappa = number(n["kappa"], key + ".kappa");
    if (n["rho_met"]) m.rho_met = number(n["rho_met"], key + ".rho_met");
    if (n["rho_ins"]) m.rho_ins = number(n["rho_ins"], key + ".rho_ins");
    if (n["dT"]) m.dT = number(n["dT"], key + ".dT");
    m.name = n["name"] ? n["name"].Scalar() : (m.name.empty() ? "custom" : m.name);
    return m;
}

inline Device parse_device(const YAML::Node& n, const std::string& key, Device d) {
    reject_unknown(n, key, {"material", "geometry", "r_ch", "l_ch", "r_e", "r_shunt"});
    using units::Dim;
    if (n["material"]) d.mat = parse_material(n["material"], key + ".material");
    if (n["geometry"]) d.geo = presets::geometry(n["geometry"].Scalar());
    if (n["r_ch"]) d.geo.r_ch = quantity(n["r_ch"], key + ".r_ch", Dim::Length);
    if (n["l_ch"]) d.geo.l_ch = quantity(n["l_ch"], key + ".l_ch", Dim::Length);
    if (n["r_e"]) d.geo.r_e = quantity(n["r_e"], key + ".r_e", Dim::Resistance);
    if (n["r_shunt"]) {
        if (n["r_shunt"].IsNull() || n["r_shunt"].Scalar() == "open") d.geo.r_shunt.reset();
        else d.geo.r_shunt = quantity(n["r_shunt"], key + ".r_shunt", Dim::Resistance);
    }
    return d;
}

inline NeuronCircuit parse_circuit(const YAML::Node& n) {
    reject_unknown(n, "circuit",
                   {"row", "topology", "rl1", "rl2", "c1", "c2", "cin", "c_stray", "e1", "e2", "r_source", "device",
                    "device1", "device2"});
    using units::Dim;
    NeuronCircuit c = n["row"] ? circuit_from_row(n["row"].Scalar()) : NeuronCircuit{};
    if (n["topology"]) {
        try {
            c.topology = topology_from_string(n["topology"].Scalar());
        } catch (const ConfigError& e) {
            throw ConfigError(where(n["topology"], "circuit.topology") + ": " + e.what());
        }
    }
    auto opt = [&](const char* k, std::optional<double>& field, Dim dim) {
        if (!n[k]) return;
        if (n[k].IsNull() || n[k].Scalar() == "none") field.reset();
        else field = quantity(n[k], std::string("circuit.") + k, dim);
    };
    auto req = [&](const char* k, double& field, Dim dim) {
        if (n[k]) field = quantity(n[k], std::string("circuit.") + k, dim);
    };
    opt("rl1", c.rl1, Dim::Resistance);
    req("rl2", c.rl2, Dim::Resistance);
    req("c1", c.c1, Dim::Capacitance);
    req("c2", c.c2, Dim::Capacitance);
    opt("cin", c.cin, Dim::Capacitance);
    req("c_stray", c.c_stray, Dim::Capacitance);
    req("e1", c.e1, Dim::Voltage);
    req("e2", c.e2, Dim::Voltage);
    req("r_source", c.r_source, Dim::Resistance);
    if (n["device"]) {
        c.dev1 = parse_device(n["device"], "circuit.device", c.dev1);
        c.dev2 = parse_device(n["device"], "circuit.device", c.dev2);
    }
    if (n["device1"]) c.dev1 = parse_device(n["device1"], "circuit.device1", c.dev1);
    if (n["device2"]) c.dev2 = parse_device(n["device2"], "circuit.device2", c.dev2);
    return c;
}

inline SolverConfig parse_solver(const YAML::Node& n) {
    reject_unknown(n, "solver",
                   {"rel_tol", "abs_tol_voltage", "abs_tol_state", "max_step", "min_step", "dense_interval",
                    "sample_steps", "max_steps"});
    using units::Dim;
    SolverConfig s;
    if (n["rel_tol"]) s.rel_tol = number(n["rel_tol"], "solver.rel_tol");
    if (n["abs_tol_voltage"]) s.abs_tol_voltage = quantity(n["abs_tol_voltage"], "solver.abs_tol_voltage", Dim::Voltage);
    if (n["abs_tol_state"]) s.abs_tol_state = number(n["abs_tol_state"], "solver.abs_tol_state");
    if (n["max_step"]) s.max_step = quantity(n["max_step"], "solver.max_step", Dim::Time);
    if (n["min_step"]) s.min_step = quantity(n["min_step"], "solver.min_step", Dim::Time);
    if (n["dense_interval"]) s.dense_interval = quantity(n["dense_interval"], "solver.dense_interval", Dim::Time);
    if (n["sample_steps"]) s.sample_steps = scalar_as<bool>(n["sample_steps"], "solver.sample_steps");
    if (n["max_steps"]) s.max_steps = scalar_as<std::uint64_t>(n["max_steps"], "solver.max_steps");
    s.validate();
    return s;
}

inline SpikeDetection parse_detection(const YAML::Node& n) {
    reject_unknown(n, "analysis", {"threshold", "min_separation", "baseline", "baseline_fraction"});
    using units::Dim;
    SpikeDetection d;
    if (n["threshold"]) d.threshold = quantity(n["threshold"], "analysis.threshold", Dim::Voltage);
    if (n["min_separation"]) d.min_separation = quantity(n["min_separation"], "analysis.min_separation", Dim::Time);
    if (n["baseline"]) d.baseline = quantity(n["baseline"], "analysis.baseline", Dim::Voltage);
    if (n["baseline_fraction"]) d.baseline_fraction = number(n["baseline_fraction"], "analysis.baseline_fraction");
    if (!(d.threshold > 0)) throw ConfigError("analysis.threshold must be positive");
    if (!(d.min_separation >= 0)) throw ConfigError("analysis.min_separation must be non-negative");
    return d;
}

inline std::vector<double> axis_values(const YAML::Node& n, const std::string& key) {
    reject_unknown(n, key, {"param", "values", "from", "to", "count", "log"});
    std::vector<double> v;
    if (n["values"]) {
        if (!n["values"].IsSequence()) throw ConfigError(where(n["values"], key + ".values") + ": expected a list");
        for (const auto& x : n["values"]) {
            const auto q = units::parse_quantity(x.Scalar());
            if (!q) throw ConfigError(where(x, key + ".values") + ": cannot parse '" + x.Scalar() + "'");
            v.push_back(q->value);
        }
        return v;
    }
    if (!n["from"] || !n["to"] || !n["count"])
        throw ConfigError(where(n, key) + ": give either values or from/to/count");
    const auto a = units::parse_quantity(n["from"].Scalar());
    const auto b = units::parse_quantity(n["to"].Scalar());
    if (!a || !b) throw ConfigError(where(n, key) + ": cannot parse from/to");
    const auto count = scalar_as<int>(n["count"], key + ".count");
    if (count < 1 || count > 10000) throw ConfigError(where(n["count"], key + ".count") + ": must be in [1, 10000]");
    const bool log = n["log"] && scalar_as<bool>(n["log"], key + ".log");
    if (log && !(a->value > 0 && b->value > 0)) throw ConfigError(where(n, key) + ": log axis needs positive bounds");
    for (int k = 0; k < count; ++k) {
        const double w = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
        v.push_back(log ? a->value * std::pow(b->value / a->value, w) : a->value + w * (b->value - a->value));
    }
    return v;
}

}  // namespace detail

/// Sets one dotted parameter (as used by sweep axes) on a config.
inline void set_parameter(ExperimentConfig& cfg, const std::string& key, double v) {
    auto& c = cfg.circuit;
    if (key == "circuit.rl1") c.rl1 = v;
    else if (key == "circuit.rl2") c.rl2 = v;
    else if (key == "circuit.c1") c.c1 = v;
    else if (key == "circuit.c2") c.c2 = v;
    else if (key == "circuit.c12") c.c1 = c.c2 = v;
    else if (key == "circuit.cin") c.cin = v;
    else if (key == "circuit.c_stray") c.c_stray = v;
    else if (key == "circuit.e1") c.e1 = v;
    else if (key == "circuit.e2") c.e2 = v;
    else if (key == "circuit.e12") c.e1 = c.e2 = v;
    else if (key == "circuit.r_source") c.r_source = v;
    else if (key == "circuit.device.r_ch") c.dev1.geo.r_ch = c.dev2.geo.r_ch = v;
    else if (key == "circuit.device.l_ch") c.dev1.geo.l_ch = c.dev2.geo.l_ch = v;
    else if (key == "t_end") cfg.t_end = v;
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(v);
    else
        throw ConfigError("unknown sweep parameter '" + key +
                          "' (circuit.{rl1,rl2,c1,c2,c12,cin,c_stray,e1,e2,e12,r_source,device.r_ch,device.l_ch}, "
                          "t_end, seed)");
}

/// Parses and validates a config document. Every error names the offending
/// key and, where known, its position in the file.
/// `base_dir` resolves a relative `stimulus: {file: ...}` path.
inline ExperimentConfig parse_config(const YAML::Node& root, const std::filesystem::path& base_dir = {}) {
    using units::Dim;
    if (!root.IsMap()) throw ConfigError("config: expected a mapping at the top level");
    detail::reject_unknown(root, "config",
                           {"circuit", "stimulus", "t_end", "onset", "solver", "analysis", "predicate", "seed",
                            "output", "sweep"});
    ExperimentConfig cfg;
    if (!root["circuit"]) throw ConfigError("config: missing required key 'circuit'");
    if (!root["stimulus"]) throw ConfigError("config: missing required key 'stimulus'");
    if (!root["t_end"]) throw ConfigError("config: missing required key 't_end'");
    cfg.circuit = detail::parse_circuit(root["circuit"]);
    if (root["stimulus"].IsMap()) {
        detail::reject_unknown(root["stimulus"], "stimulus", {"file"});
        if (!root["stimulus"]["file"]) throw ConfigError(detail::where(root["stimulus"], "stimulus") + ": missing 'file'");
        const std::filesystem::path file = base_dir / root["stimulus"]["file"].Scalar();
        std::ifstream is(file);
        if (!is) throw ConfigError(detail::where(root["stimulus"]["file"], "stimulus.file") + ": cannot open '" + file.string() + "'");
        cfg.stimulus.assign(std::istreambuf_iterator<char>(is), {});
    } else {
        cfg.stimulus = root["stimulus"].Scalar();
    }
    cfg.t_end = detail::quantity(root["t_end"], "t_end", Dim::Time);
    if (root["onset"]) cfg.onset = detail::quantity(root["onset"], "onset", Dim::Time);
    if (root["solver"]) cfg.solver = detail::parse_solver(root["solver"]);
    if (root["analysis"]) cfg.detection = detail::parse_detection(root["analysis"]);
    if (root["predicate"]) cfg.predicate = root["predicate"].Scalar();
    if (root["seed"]) cfg.seed = detail::scalar_as<std::uint64_t>(root["seed"], "seed");
    if (const auto out = root["output"]) {
        detail::reject_unknown(out, "output", {"dir", "name"});
        if (out["dir"]) cfg.output_dir = out["dir"].Scalar();
        if (out["name"]) cfg.output_name = out["name"].Scalar();
    }
    if (const auto sw = root["sweep"]) {
        detail::reject_unknown(sw, "sweep", {"axes"});
        if (sw["axes"]) {
            if (!sw["axes"].IsSequence()) throw ConfigError(detail::where(sw["axes"], "sweep.axes") + ": expected a list");
            if (sw["axes"].size() > 2) throw ConfigError(detail::where(sw["axes"], "sweep.axes") + ": at most two axes");
            for (std::size_t k = 0; k < sw["axes"].size(); ++k) {
                const auto a = sw["axes"][k];
                const std::string key = "sweep.axes[" + std::to_string(k) + "]";
                if (!a["param"]) throw ConfigError(detail::where(a, key) + ": missing 'param'");
                SweepAxis axis{a["param"].Scalar(), detail::axis_values(a, key)};
                ExperimentConfig probe = cfg;
                set_parameter(probe, axis.param, axis.values.front());
                cfg.axes.push_back(std::move(axis));
            }
        }
    }
    if (!(cfg.t_end > 0)) throw ConfigError("t_end must be positive");
    if (cfg.onset < 0 || cfg.onset > cfg.t_end) throw ConfigError("onset must lie in [0, t_end]");
    cfg.circuit.validate();
    const auto program = parse_protocol(cfg.stimulus);
    NeuronSystem(cfg.circuit).check_mode(program.mode);
    if (cfg.predicate) {
        const auto& entry = find_entry(behavior_catalog(), *cfg.predicate);
        if (entry.runs.size() != 1)
            throw ConfigError("predicate '" + *cfg.predicate + "' compares " + std::to_string(entry.runs.size()) +
                              " runs; only single-run behaviors can judge a config run");
    }
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    try {
        return parse_config(YAML::Load(text));
    } catch (const YAML::Exception& e) {
        throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
    }
}

inline ExperimentConfig load_config(const std::string& path) {
    try {
        return parse_config(YAML::LoadFile(path), std::filesystem::path(path).parent_path());
    } catch (const YAML::BadFile&) {
        throw ConfigError("cannot open config file '" + path + "'");
    } catch (const YAML::Exception& e) {
        throw ParseError(path + ": " + e.msg, e.mark.line + 1, e.mark.column + 1);
    }
}

}  // namespace mottsim
