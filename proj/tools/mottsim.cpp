// mottsim: command-line front end for the Mott-neuron simulator.

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "mottsim/config.hpp"
#include "mottsim/report.hpp"

namespace fs = std::filesystem;
using namespace mottsim;

namespace {

constexpr int kExitFail = 1;   // a predicate or criterion failed
constexpr int kExitError = 2;  // bad input or solver failure

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    unsigned jobs = 1;
    std::string out;
};

fs::path output_dir(const Globals& g, const std::string& from_config = {}) {
    if (!g.out.empty()) return g.out;
    if (!from_config.empty()) return from_config;
    if (const char* env = std::getenv("MOTTSIM_OUTPUT_DIR"); env && *env) return env;
    return "mottsim-out";
}

SolverConfig apply_tol(SolverConfig cfg, const Globals& g) {
    if (g.tol) {
        if (!(*g.tol > 0)) throw ConfigError("--tol must be positive");
        cfg = cfg.scaled(*g.tol / cfg.rel_tol);
    }
    return cfg;
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

// ---------------------------------------------------------------- run

int cmd_run(const std::string& path, const Globals& g) {
    ExperimentConfig cfg = load_config(path);
    if (g.seed) cfg.seed = *g.seed;
    const SolverConfig solver = apply_tol(cfg.solver, g);
    const auto outcome = simulate(cfg.run_spec(), solver);
    json report = {{"config", fs::path(path).filename().string()}, {"seed", cfg.seed}, {"run", to_json(outcome)}};
    bool pass = true;
    if (cfg.predicate) {
        const auto& entry = find_entry(behavior_catalog(), *cfg.predicate);
        const auto verdict = entry.predicate({outcome});
        report["predicate"] = {{"name", *cfg.predicate}, {"verdict", to_json(verdict)}};
        pass = verdict.pass;
    }
    const fs::path dir = output_dir(g, cfg.output_dir);
    write_atomic(dir / (cfg.output_name + ".csv"), trace_csv(outcome.trace));
    write_atomic(dir / (cfg.output_name + ".json"), report.dump(2) + "\n");
    std::cout << cfg.output_name << ": " << outcome.train.size() << " spikes, " << outcome.trace.size()
              << " samples, energy residual " << fmt(outcome.trace.energy_residual(), 3);
    if (cfg.predicate) std::cout << ", " << *cfg.predicate << ' ' << (pass ? "PASS" : "FAIL");
    std::cout << "\n  wrote " << (dir / (cfg.output_name + ".csv")).string() << " and .json\n";
    return pass ? 0 : kExitFail;
}

// ---------------------------------------------------------------- catalog

int cmd_catalog_list() {
    const auto cat = behavior_catalog();
    std::map<CatalogGroup, int> counts;
    for (const auto& e : cat) ++counts[e.group];
    for (auto group : {CatalogGroup::Tonic, CatalogGroup::Phasic, CatalogGroup::Shared, CatalogGroup::Mixed}) {
        std::cout << to_string(group) << " (" << counts[group] << ")\n";
        for (const auto& e : cat) {
            if (e.group != group) continue;
            std::string rows;
            for (const auto& r : e.rows) rows += (rows.empty() ? "" : ",") + r;
            std::cout << "  " << std::left << std::setw(32) << e.name << std::setw(12) << rows
                      << (e.approx ? "approx  " : "        ") << e.protocol_notes << '\n';
        }
    }
    std::cout << cat.size() << " behaviors\n";
    return 0;
}

void print_result(const EntryResult& r) {
    std::cout << (r.verdict.pass ? "PASS " : "FAIL ") << std::left << std::setw(32) << r.name << std::right
              << std::setw(7) << fmt(r.wall_seconds, 3) << " s  " << r.verdict.summary << '\n';
    for (const auto& [k, v] : r.verdict.metrics) std::cout << "       " << k << " = " << fmt(v, 6) << '\n';
    for (const auto& n : r.verdict.notes) std::cout << "       note: " << n << '\n';
}

int cmd_catalog_run(const std::vector<std::string>& names, const Globals& g) {
    const auto cat = behavior_catalog();
    std::vector<const CatalogEntry*> chosen;
    if (names.empty())
        for (const auto& e : cat) chosen.push_back(&e);
    else
        for (const auto& n : names) chosen.push_back(&find_entry(cat, n));
    const SolverConfig solver = apply_tol(SolverConfig{}, g);
    const auto results = parallel_map<EntryResult>(chosen.size(), g.jobs,
                                                   [&](std::size_t k) { return run_entry(*chosen[k], solver); });
    json summary = json::array();
    std::size_t passed = 0;
    double wall = 0;
    for (const auto& r : results) {
        print_result(r);
        summary.push_back(to_json(r));
        passed += r.verdict.pass;
        wall += r.wall_seconds;
    }
    std::cout << passed << "/" << results.size() << " behaviors pass (" << fmt(wall, 3) << " s)\n";
    const fs::path dir = output_dir(g);
    const std::string file = names.size() == 1 ? names.front() + ".json" : "catalog.json";
    write_atomic(dir / file, json{{"results", summary}}.dump(2) + "\n");
    return passed == results.size() ? 0 : kExitFail;
}

// ---------------------------------------------------------------- sweep

std::string cell_key(const std::vector<SweepAxis>& axes, const std::vector<std::size_t>& idx) {
    std::string key = "cell";
    for (std::size_t a = 0; a < axes.size(); ++a) key += "_" + std::to_string(idx[a]);
    return key;
}

json cell_summary(const RunOutcome& o) {
    json j = {{"spikes", o.train.size()},
              {"first_spike", o.train.empty() ? json(nullptr) : json(o.train.times.front())},
              {"at_rest", o.at_rest},
              {"energy_residual", o.trace.energy_residual()}};
    const auto iv = isi_and_jisi(o.train);
    j["mean_rate"] = iv.isi.empty() ? 0.0 : 1.0 / detail::mean(iv.isi);
    j["regime"] = std::string(to_string(classify_regime(o)));
    return j;
}

int cmd_sweep(const std::string& path, const Globals& g) {
    ExperimentConfig base = load_config(path);
    if (g.seed) base.seed = *g.seed;
    const SolverConfig solver = apply_tol(base.solver, g);
    const fs::path dir = output_dir(g, base.output_dir) / (base.output_name + "-sweep");
    const auto& axes = base.axes;
    std::vector<std::vector<std::size_t>> cells;
    if (axes.empty()) cells.push_back({});
    else if (axes.size() == 1)
        for (std::size_t i = 0; i < axes[0].values.size(); ++i) cells.push_back({i});
    else
        for (std::size_t i = 0; i < axes[0].values.size(); ++i)
            for (std::size_t j = 0; j < axes[1].values.size(); ++j) cells.push_back({i, j});

    std::atomic<std::size_t> reused{0};
    const auto rows = parallel_map<json>(cells.size(), g.jobs, [&](std::size_t c) {
        const auto& idx = cells[c];
        const fs::path file = dir / (cell_key(axes, idx) + ".json");
        if (fs::exists(file)) {
            std::ifstream is(file);
            ++reused;
            return json::parse(is);
        }
        json row;
        for (std::size_t a = 0; a < axes.size(); ++a) row[axes[a].param] = axes[a].values[idx[a]];
        try {
            ExperimentConfig cfg = base;
            for (std::size_t a = 0; a < axes.size(); ++a) set_parameter(cfg, axes[a].param, axes[a].values[idx[a]]);
            cfg.circuit.validate();
            const auto o = simulate(cfg.run_spec(), solver);
            std::ostringstream bin;
            write_binary(o.trace, bin);
            write_atomic(dir / (cell_key(axes, idx) + ".mtrc"), bin.str());
            row["result"] = cell_summary(o);
            if (cfg.predicate) {
                const auto v = find_entry(behavior_catalog(), *cfg.predicate).predicate({o});
                row["pass"] = v.pass;
            }
        } catch (const std::exception& ex) {
            row["error"] = ex.what();
        }
        write_atomic(file, row.dump(2) + "\n");
        return row;
    });

    std::ostringstream csv;
    csv.precision(8);
    for (const auto& a : axes) csv << a.param << ',';
    csv << "spikes,first_spike,mean_rate,regime,at_rest,energy_residual,pass,error\n";
    std::size_t failed = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& row = rows[c];
        for (std::size_t a = 0; a < axes.size(); ++a) csv << axes[a].values[cells[c][a]] << ',';
        if (row.contains("result")) {
            const auto& r = row["result"];
            csv << r["spikes"] << ',' << (r["first_spike"].is_null() ? "" : fmt(r["first_spike"].get<double>(), 8))
                << ',' << r["mean_rate"].get<double>() << ',' << r["regime"].get<std::string>() << ','
                << r["at_rest"] << ',' << r["energy_residual"].get<double>() << ','
                << (row.contains("pass") ? (row["pass"].get<bool>() ? "1" : "0") : "") << ",\n";
        } else {
            ++failed;
            std::string err = row.value("error", std::string{});
            std::replace(err.begin(), err.end(), ',', ';');
            std::replace(err.begin(), err.end(), '\n', ' ');
            csv << ",,,,,,," << err << '\n';
        }
    }
    write_atomic(dir / "aggregate.csv", csv.str());
    std::cout << cells.size() << " cells (" << reused << " reused, " << failed << " failed) -> "
              << (dir / "aggregate.csv").string() << '\n';
    return failed ? kExitFail : 0;
}

// ---------------------------------------------------------------- ee-curve, iv

double parse_as(const std::string& text, units::Dim dim, const std::string& what) {
    const auto q = units::parse_quantity(text);
    if (!q || (q->dim != units::Dim::None && q->dim != dim))
        throw ConfigError(what + ": cannot parse '" + text + "' as " + std::string(units::to_string(dim)));
    return q->value;
}

int cmd_ee_curve(const std::string& density_text, const std::string& a_min, const std::string& a_max, int count,
                 const std::string& r_text, const std::string& l_text, const Globals& g) {
    const double density = parse_as(density_text, units::Dim::CapDensity, "--density");
    // areas in um^2 unless a unit is given
    const auto area = [](const std::string& t) {
        const auto q = units::parse_quantity(t);
        if (!q) throw ConfigError("cannot parse area '" + t + "'");
        return q->value * 1e-12;
    };
    const auto geo = presets::bare(parse_as(r_text, units::Dim::Length, "--r"), parse_as(l_text, units::Dim::Length, "--l"));
    const auto pts = ee_area_curve(density, log_space(area(a_min), area(a_max), static_cast<std::size_t>(count)), geo,
                                   0.8, {}, apply_tol(SolverConfig{}, g));
    std::ostringstream csv;
    csv.precision(8);
    csv << "area_um2,capacitance_F,spikes_per_joule\n";
    for (const auto& p : pts)
        csv << p.area * 1e12 << ',' << p.capacitance << ',' << (p.spikes_per_joule ? fmt(*p.spikes_per_joule, 8) : "")
            << '\n';
    std::cout << csv.str();
    write_atomic(output_dir(g) / "ee-curve.csv", csv.str());
    return 0;
}

int cmd_iv(const std::string& material, const std::string& r_text, const std::string& l_text, double r_e,
           const std::string& mode, const std::string& max_text, int points, const Globals& g) {
    const Device dev{presets::material(material),
                     {parse_as(r_text, units::Dim::Length, "--r"), parse_as(l_text, units::Dim::Length, "--l"), r_e, {}}};
    dev.validate();
    const bool force_current = mode == "current";
    if (!force_current && mode != "voltage") throw ConfigError("--mode must be current or voltage");
    const double max = parse_as(max_text, force_current ? units::Dim::Current : units::Dim::Voltage, "--max");
    if (!(max > 0) || points < 2) throw ConfigError("--max must be positive and --points at least 2");
    const double step = max / (points - 1);
    const auto curve = quasi_static_iv(dev, force_current ? DriveMode::ForceCurrent : DriveMode::ForceVoltage,
                                       {step, max, step});
    std::ostringstream csv;
    csv.precision(10);
    csv << "drive,v,i,u,branch\n";
    for (const auto& p : curve.points) csv << p.drive << ',' << p.v << ',' << p.i << ',' << p.u << ',' << (p.up ? "up" : "down") << '\n';
    write_atomic(output_dir(g) / "iv.csv", csv.str());
    std::cout << "threshold voltage " << fmt(threshold_voltage(dev), 5) << " V, " << curve.points.size()
              << " points -> " << (output_dir(g) / "iv.csv").string() << '\n';
    return 0;
}

// ---------------------------------------------------------------- experiments

int cmd_experiment(const std::string& name, const Globals& g) {
    const SolverConfig solver = apply_tol(SolverConfig{}, g);
    json out;
    if (name == "load-line") {
        const auto osc = switching_oscillator(Device{presets::vo2(), presets::bare(10e-9, 50e-9)});
        out = to_json(load_line_check(osc));
        out["v_dc"] = osc.e1;
        out["r_load"] = *osc.rl1;
    } else if (name == "regime-map") {
        const auto cs = log_space(1e-9, 10e-9, 5);
        out = to_json(regime_map(circuit_from_row("4c"), cs, cs,
                                 "mode current\nramp t0=20us t1=1020us from=0uA to=150uA\n", 1020e-6, 20e-6, solver));
    } else if (name == "latency") {
        out = to_json(latency_study(circuit_from_row("S18"), {0.30, 0.31, 0.32, 0.33, 0.34, 0.35, 0.36, 0.37, 0.375},
                                    10e-6, 120e-6, solver));
    } else if (name == "energy-scaling") {
        for (const auto& [key, geo] : {std::pair{"r10_l10", presets::bare(10e-9, 10e-9)},
                                       std::pair{"r36_l50", presets::bare(36e-9, 50e-9)}})
            out[key] = to_json(energy_scaling(geo, log_space(10e-15, 10e-12, 7), {}, solver));
    } else if (name == "skipping") {
        const auto c = circuit_from_row("S36");
        const double dc = silent_drive_limit(c, 0.0, 82.5e-6, 1e-3, 0.25e-6, solver);
        out["dc"] = dc;
        const std::uint64_t seed = g.seed.value_or(1);
        for (const auto& lv : skipping_study(c, dc, {5e-6, 15e-6, 25e-6, 50e-6}, 10e-3, seed, solver))
            out["levels"].push_back(to_json(lv));
    } else if (name == "switching") {
        out["vo2"] = to_json(switching_sweep(presets::vo2(), {5e-9, 7.5e-9, 10e-9, 12.5e-9, 15e-9, 20e-9}, 50e-9, solver));
        out["nbo2"] = to_json(switching_sweep(presets::nbo2(), {5e-9, 10e-9, 15e-9}, 50e-9, solver));
    } else {
        throw ConfigError("unknown experiment '" + name +
                          "' (load-line, regime-map, latency, energy-scaling, skipping, switching)");
    }
    const fs::path file = output_dir(g) / (name + ".json");
    write_atomic(file, out.dump(2) + "\n");
    std::cout << out.dump(2) << "\nwrote " << file.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mott-memristor neuron simulator"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Noise seed (overrides the config)");
    app.add_option("--tol", g.tol, "Relative solver tolerance; absolute tolerances scale with it");
    app.add_option("--jobs,-j", g.jobs, "Worker threads for catalog and sweep cells")->check(CLI::PositiveNumber);
    app.add_option("--out,-o", g.out, "Output directory (default: $MOTTSIM_OUTPUT_DIR or ./mottsim-out)");

    std::string config_path;
    auto* run = app.add_subcommand("run", "Simulate one configured experiment; writes a CSV trace and a JSON report");
    run->add_option("config", config_path, "YAML config file")->required();

    auto* validate = app.add_subcommand("validate-config", "Check a config file without simulating");
    validate->add_option("config", config_path, "YAML config file")->required();

    auto* catalog = app.add_subcommand("catalog", "The 23-behavior catalog");
    catalog->require_subcommand(1);
    auto* cat_list = catalog->add_subcommand("list", "List behaviors by group");
    auto* cat_all = catalog->add_subcommand("run-all", "Run every behavior and check its predicate");
    std::vector<std::string> names;
    auto* cat_run = catalog->add_subcommand("run", "Run named behaviors");
    cat_run->add_option("name", names, "Behavior names")->required();

    auto* sweep = app.add_subcommand("sweep", "Run a config over up to two parameter axes (resumable)");
    sweep->add_option("config", config_path, "YAML config file with a sweep section")->required();

    std::string density = "1fF/um2", a_min = "0.1", a_max = "1000", r_text = "10nm", l_text = "10nm";
    int count = 9;
    auto* ee = app.add_subcommand("ee-curve", "Spikes per joule against neuron area at one capacitance density");
    ee->add_option("--density", density, "Capacitance density, e.g. 1fF/um2, 10fF/um2, 43fF/um2")->capture_default_str();
    ee->add_option("--area-min", a_min, "Smallest neuron area [um^2]")->capture_default_str();
    ee->add_option("--area-max", a_max, "Largest neuron area [um^2]")->capture_default_str();
    ee->add_option("--count", count, "Log-spaced points")->capture_default_str()->check(CLI::PositiveNumber);
    ee->add_option("--r", r_text, "Channel radius")->capture_default_str();
    ee->add_option("--l", l_text, "Channel length")->capture_default_str();

    std::string material = "vo2-table2", iv_r = "56nm", iv_l = "100nm", mode = "current", iv_max = "2mA";
    double r_e = 0;
    int points = 2001;
    auto* iv = app.add_subcommand("iv", "Quasi-static I-V of one device");
    iv->add_option("--material", material, "vo2-table2 | vo2-table1 | nbo2-table1")->capture_default_str();
    iv->add_option("--r", iv_r, "Channel radius")->capture_default_str();
    iv->add_option("--l", iv_l, "Channel length")->capture_default_str();
    iv->add_option("--r-e", r_e, "Series electrode resistance [Ohm]")->capture_default_str();
    iv->add_option("--mode", mode, "current | voltage (forced quantity)")->capture_default_str();
    iv->add_option("--max", iv_max, "Largest forced value")->capture_default_str();
    iv->add_option("--points", points, "Sweep points")->capture_default_str();

    std::string experiment;
    auto* exp = app.add_subcommand("experiment", "Multi-run studies (JSON output)");
    exp->add_option("name", experiment, "load-line | regime-map | latency | energy-scaling | skipping | switching")
        ->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (run->parsed()) return cmd_run(config_path, g);
        if (validate->parsed()) {
            const auto cfg = load_config(config_path);
            std::cout << config_path << ": ok (" << to_string(cfg.circuit.topology) << ", "
                      << parse_protocol(cfg.stimulus).segments.size() << " stimulus segments, " << cfg.axes.size()
                      << " sweep axes)\n";
            return 0;
        }
        if (cat_list->parsed()) return cmd_catalog_list();
        if (cat_all->parsed()) return cmd_catalog_run({}, g);
        if (cat_run->parsed()) return cmd_catalog_run(names, g);
        if (sweep->parsed()) return cmd_sweep(config_path, g);
        if (ee->parsed()) return cmd_ee_curve(density, a_min, a_max, count, r_text, l_text, g);
        if (iv->parsed()) return cmd_iv(material, iv_r, iv_l, r_e, mode, iv_max, points, g);
        if (exp->parsed()) return cmd_experiment(experiment, g);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitError;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error at t = " << e.time() << " s: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return 0;
}
