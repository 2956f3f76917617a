#pragma once

// JSON reports, atomic file output and a small worker pool for independent runs.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "mottsim/analysis.hpp"
#include "mottsim/catalog.hpp"
#include "mottsim/experiments.hpp"
#include "mottsim/simulate.hpp"

namespace mottsim {

using json = nlohmann::ordered_json;

/// Writes through a sibling temporary file and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ConfigError("cannot write '" + tmp.string() + "'");
        os << content;
        if (!os) throw ConfigError("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline std::string trace_csv(const SimulationTrace& tr) {
    std::ostringstream os;
    os.precision(10);
    write_csv(tr, os);
    return os.str();
}

/// Runs fn(0..n-1) on up to `jobs` threads. Results land in index order.
template <class R>
std::vector<R> parallel_map(std::size_t n, unsigned jobs, const std::function<R(std::size_t)>& fn) {
    std::vector<R> out(n);
    if (jobs <= 1 || n <= 1) {
        for (std::size_t k = 0; k < n; ++k) out[k] = fn(k);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n);
    for (unsigned w = 0; w < std::min<std::size_t>(jobs, n); ++w)
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < n; k = next++) {
                try {
                    out[k] = fn(k);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const SpikeTrain& t) {
    return {{"count", t.size()}, {"baseline", t.baseline}, {"level", t.level}, {"times", t.times}, {"peaks", t.peaks}};
}

inline json to_json(const SolverStats& s) {
    return {{"accepted", s.accepted},         {"rejected", s.rejected},
            {"rhs_evals", s.rhs_evals},       {"jacobian_evals", s.jacobian_evals},
            {"floor_clamps", s.floor_clamps}, {"ceil_clamps", s.ceil_clamps},
            {"smallest_step", std::isfinite(s.smallest_step) ? json(s.smallest_step) : json(nullptr)},
            {"largest_step", s.largest_step}};
}

/// Spike statistics of one run: intervals, bursts, excitability and latency.
inline json analysis_json(const RunOutcome& o) {
    json a;
    const auto iv = isi_and_jisi(o.train);
    a["isi"] = iv.isi;
    a["isi_cv"] = iv.coefficient_of_variation();
    a["fundamental_isi"] = opt_json(fundamental_isi(iv));
    if (!o.train.empty()) {
        const auto bm = burst_metrics(o.train);
        a["bursts"] = bm.bursts.size();
        a["spikes_per_burst"] = bm.spikes_per_burst;
        a["burst_period"] = opt_json(bm.period);
    }
    a["excitability"] = std::string(to_string(classify_excitability(fi_curve(o.trace, o.train))));
    a["latency"] = opt_json(spike_latency(o.train, o.onset));
    return a;
}

inline json to_json(const RunOutcome& o) {
    json j;
    j["label"] = o.label;
    j["at_rest"] = o.at_rest;
    j["initial_state"] = {{"v_na", o.initial.v_na}, {"v_k", o.initial.v_k}, {"u1", o.initial.u1}, {"u2", o.initial.u2}};
    j["samples"] = o.trace.size();
    j["energy_residual"] = o.trace.energy_residual();
    j["supply_energy"] = o.trace.e_supply.empty() ? 0.0 : o.trace.e_supply.back();
    j["spikes"] = to_json(o.train);
    j["analysis"] = analysis_json(o);
    j["solver"] = to_json(o.trace.stats);
    return j;
}

inline json to_json(const predicates::Verdict& v) {
    json metrics = json::object();
    for (const auto& [k, x] : v.metrics) metrics[k] = x;
    return {{"pass", v.pass}, {"summary", v.summary}, {"metrics", metrics}, {"notes", v.notes}};
}

inline json to_json(const CatalogEntry& e) {
    json runs = json::array();
    for (const auto& r : e.runs) runs.push_back({{"label", r.label}, {"t_end", r.t_end}, {"protocol", r.protocol}});
    return {{"name", e.name},       {"group", std::string(to_string(e.group))},
            {"rows", e.rows},       {"approx", e.approx},
            {"protocol", e.protocol_notes}, {"runs", runs}};
}

inline json to_json(const EntryResult& r) {
    json runs = json::array();
    for (const auto& o : r.outcomes)
        runs.push_back({{"label", o.label},
                        {"at_rest", o.at_rest},
                        {"spikes", o.train.size()},
                        {"first_spike", o.train.empty() ? json(nullptr) : json(o.train.times.front())},
                        {"energy_residual", o.trace.energy_residual()}});
    json j = {{"name", r.name}, {"verdict", to_json(r.verdict)}, {"runs", runs}};
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

// ---------------------------------------------------------------- experiment results

inline json to_json(const LoadLineResult& r) {
    json c = json::array();
    for (const auto& x : r.crossings) c.push_back({{"v", x.v}, {"i", x.i}, {"on_ndr", x.on_ndr}});
    return {{"oscillation_predicted", r.oscillation_predicted}, {"crossings", c}};
}

inline json to_json(const RegimeMap& m) {
    json cells = json::array();
    for (const auto& c : m.cells) {
        json x = {{"c1", c.c1},     {"c2", c.c2},         {"regime", std::string(to_string(c.regime))},
                  {"spikes", c.spikes}, {"spikes_per_burst", c.spikes_per_burst}, {"at_rest", c.at_rest}};
        if (!c.error.empty()) x["error"] = c.error;
        cells.push_back(x);
    }
    const auto s = regime_structure(m);
    return {{"c1_values", m.c1_values},
            {"c2_values", m.c2_values},
            {"cells", cells},
            {"structure",
             {{"class2_cells", s.class2_cells},
              {"class1_cells", s.class1_cells},
              {"bursting_cells", s.bursting_cells},
              {"failed_cells", s.failed_cells},
              {"class2_only_above_diagonal", s.class2_only_above_diagonal},
              {"bursting_below_boundary", s.bursting_below_boundary},
              {"boundary_ratio", opt_json(s.boundary_ratio)}}}};
}

inline json to_json(const LatencyStudy& s) {
    json pts = json::array();
    for (std::size_t k = 0; k < s.amplitudes.size(); ++k)
        pts.push_back({{"amplitude", s.amplitudes[k]}, {"latency", opt_json(s.latencies[k])}});
    json j = {{"points", pts}};
    if (s.fit) j["fit"] = {{"tau0", s.fit->tau0}, {"b", s.fit->b}, {"e", s.fit->e}, {"r2", s.fit->r2}};
    else j["fit"] = nullptr;
    return j;
}

inline json to_json(const SpikeEnergy& e) {
    json j = {{"capacitance", e.capacitance}, {"energy", e.energy},       {"rate", e.rate},
              {"spikes", e.spikes},           {"static_power", e.static_power}, {"valid", e.valid}};
    if (!e.error.empty()) j["error"] = e.error;
    return j;
}

inline json to_json(const EnergyScaling& s) {
    json pts = json::array();
    for (const auto& p : s.points) pts.push_back(to_json(p));
    json j = {{"points", pts}};
    j["loglog"] = s.loglog ? json{{"slope", s.loglog->slope}, {"intercept", s.loglog->intercept}, {"r2", s.loglog->r2}}
                           : json(nullptr);
    return j;
}

inline json to_json(const SkippingLevel& lv) {
    return {{"noise_pp", lv.noise_pp},
            {"spikes", lv.train.size()},
            {"fundamental_isi", opt_json(lv.fundamental)},
            {"isi_cv", lv.isi_cv},
            {"modes", lv.modes},
            {"mode_multiples", mode_multiples(lv)},
            {"dropouts", lv.dropouts},
            {"dropouts_with_bump", lv.dropouts_with_bump},
            {"mean_amplitude", lv.amplitudes.mean},
            {"isi", lv.intervals.isi}};
}

inline json to_json(const std::vector<SwitchingPoint>& pts) {
    json j = json::array();
    for (const auto& p : pts) {
        json x = {{"r_ch", p.r_ch}, {"rise_time", opt_json(p.rise_time)}};
        if (!p.error.empty()) x["error"] = p.error;
        j.push_back(x);
    }
    return j;
}

inline json to_json(const std::vector<EeAreaPoint>& pts) {
    json j = json::array();
    for (const auto& p : pts)
        j.push_back({{"area", p.area}, {"capacitance", p.capacitance}, {"spikes_per_joule", opt_json(p.spikes_per_joule)}});
    return j;
}

}  // namespace mottsim
