#pragma once

// Pass predicates of the behavior catalog. Every numeric threshold a
// predicate uses is a member of `Thresholds`.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mottsim/analysis.hpp"
#include "mottsim/simulate.hpp"

namespace mottsim::predicates {

struct Thresholds {
    std::size_t tonic_min_spikes = 5;
    double tonic_max_cv = 0.1;
    double limit_cycle_tube = 0.05;        ///< fraction of the phase-plane diameter
    double sustained_isi_multiple = 3.0;   ///< last spike within this many median ISIs of the end
    double onset_window = 40e-6;           ///< phasic responses must start this soon after the input edge
    double phasic_silence_fraction = 0.5;  ///< trailing share of the stimulus that must be silent
    std::size_t burst_min_spikes = 2;      ///< mean spikes per burst
    std::size_t burst_min_count = 2;       ///< bursts in the run
    double gap_factor = 3.0;
    double adaptation_ratio = 1.2;        ///< late ISI / early ISI
    double mixed_early_ratio = 0.6;       ///< onset ISI / later median ISI
    double mixed_late_cv = 0.2;
    double equal_amplitude_tolerance = 0.05;
    double resonance_low_fraction = 0.5;  ///< low-end response / peak response for a band-pass
    double lowpass_peak_share = 0.25;     ///< a low-pass peaks within this leading share of the sweep
    std::size_t zap_bins = 20;
    double block_elevation = 0.3;          ///< V above rest for the locked output
    double after_potential_window = 60e-6; ///< after-potential sampled this long after the spike peak
    double quiet_tail = 150e-6;            ///< bistability: silent tail after a successful off-switch
};

inline const Thresholds& thresholds() {
    static const Thresholds t;
    return t;
}

struct Verdict {
    bool pass = false;
    std::string summary;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::string> notes;

    void metric(std::string key, double value) { metrics.emplace_back(std::move(key), value); }
};

using Outcomes = std::vector<RunOutcome>;

inline const RunOutcome& run(const Outcomes& o, const std::string& label) {
    for (const auto& r : o)
        if (r.label == label) return r;
    throw ConfigError("catalog run '" + label + "' missing");
}

inline std::size_t spikes_between(const RunOutcome& r, double a, double b) { return r.train.count_in(a, b); }

inline std::vector<double> spikes_after(const RunOutcome& r, double t) {
    std::vector<double> s;
    for (double x : r.train.times)
        if (x >= t) s.push_back(x);
    return s;
}

inline std::vector<double> intervals(const std::vector<double>& times) {
    std::vector<double> d;
    for (std::size_t k = 1; k < times.size(); ++k) d.push_back(times[k] - times[k - 1]);
    return d;
}

inline double cv(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    const double m = detail::mean(x);
    double s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1)) / m;
}

inline void note_rest(Verdict& v, const Outcomes& o) {
    for (const auto& r : o)
        if (!r.at_rest) v.notes.push_back("run '" + r.label + "': no zero-input rest (self-oscillatory); started from the insulating operating point");
}

/// Sustained periodic firing after `from` until the end of the run.
inline bool sustained_firing(const RunOutcome& r, double from, Verdict& v, const std::string& prefix = "") {
    const auto& th = thresholds();
    const auto s = spikes_after(r, from);
    const auto isi = intervals(s);
    v.metric(prefix + "spikes", static_cast<double>(s.size()));
    if (s.size() < th.tonic_min_spikes) return false;
    const double med = detail::median(isi);
    const double c = cv(isi);
    const double tail = r.trace.t.back() - s.back();
    v.metric(prefix + "median_isi_s", med);
    v.metric(prefix + "isi_cv", c);
    v.metric(prefix + "tail_gap_s", tail);
    return c <= th.tonic_max_cv && tail <= th.sustained_isi_multiple * med;
}

inline Verdict finish(Verdict v, bool pass, const std::string& what) {
    v.pass = pass;
    v.summary = what;
    return v;
}

// ------------------------------------------------------------------ tonic

inline Verdict tonic_spiking(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& r = run(o, "dc");
    const bool quiet_before = spikes_between(r, 0, r.onset) == 0;
    const bool sustained = sustained_firing(r, r.onset, v);
    const auto lc = limit_cycle_check(r.trace, r.train, thresholds().limit_cycle_tube);
    v.metric("limit_cycle_deviation", lc.max_deviation);
    return finish(v, quiet_before && sustained && lc.closed, "sustained periodic spiking under d.c. input with a closed phase-plane loop");
}

inline Verdict tonic_bursting(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& th = thresholds();
    const auto& r = run(o, "dc");
    SpikeTrain t = r.train;
    const auto s = spikes_after(r, r.onset);
    t.times = s;
    const auto bm = burst_metrics(t, th.gap_factor);
    v.metric("spikes", static_cast<double>(s.size()));
    v.metric("bursts", static_cast<double>(bm.bursts.size()));
    v.metric("spikes_per_burst", bm.spikes_per_burst);
    if (bm.period) v.metric("burst_period_s", *bm.period);
    const bool pass = bm.bursts.size() >= th.burst_min_count && bm.spikes_per_burst >= th.burst_min_spikes &&
                      bm.bursts.size() < s.size();
    return finish(v, pass, "repeating bursts of several spikes under d.c. input");
}

inline Excitability classify_run(const RunOutcome& r, Verdict& v) {
    SpikeTrain t = r.train;
    const auto fi = fi_curve(r.trace, t);
    const auto cls = classify_excitability(fi);
    v.metric("spikes", static_cast<double>(t.size()));
    if (!fi.points.empty()) {
        double f_max = 0;
        for (const auto& p : fi.points) f_max = std::max(f_max, p.frequency);
        v.metric("onset_current_A", fi.points.front().current);
        v.metric("onset_frequency_hz", fi.points.front().frequency);
        v.metric("max_frequency_hz", f_max);
    }
    v.notes.push_back(std::string("classified as ") + std::string(to_string(cls)));
    return cls;
}

inline Verdict class1(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    return finish(v, classify_run(run(o, "ramp"), v) == Excitability::Class1,
                  "low onset frequency rising with the ramped input");
}

inline Verdict class2(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    return finish(v, classify_run(run(o, "ramp"), v) == Excitability::Class2,
                  "abrupt onset at a high, nearly constant frequency under the ramped input");
}

inline Verdict spike_frequency_adaptation(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    // every run (one per circuit family) must slow down
    bool all = !o.empty();
    for (const auto& r : o) {
        const auto isi = intervals(spikes_after(r, r.onset));
        v.metric(r.label + "_spikes", static_cast<double>(isi.empty() ? r.train.size() : isi.size() + 1));
        if (isi.size() < 2) {
            all = false;
            continue;
        }
        const double early = isi.front();
        const double late = isi.back();
        v.metric(r.label + "_first_isi_s", early);
        v.metric(r.label + "_last_isi_s", late);
        v.metric(r.label + "_adaptation_ratio", late / early);
        all = all && late >= thresholds().adaptation_ratio * early;
    }
    return finish(v, all, "firing rate decays during a sustained input");
}

inline Verdict spike_latency(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    std::vector<std::pair<double, double>> pts;  // amplitude, latency
    for (const auto& r : o) {
        const auto lat = mottsim::spike_latency(r.train, r.onset);
        const double amp = r.program.segments.empty() ? 0.0 : r.program.segments.front().amp;
        if (lat) {
            pts.emplace_back(amp, *lat);
            v.metric("latency_s@" + r.label, *lat);
        }
    }
    std::sort(pts.begin(), pts.end());
    bool decreasing = pts.size() >= 3;
    for (std::size_t k = 1; k < pts.size(); ++k) decreasing = decreasing && pts[k].second < pts[k - 1].second;
    v.metric("firing_amplitudes", static_cast<double>(pts.size()));
    return finish(v, decreasing, "latency to the first spike shrinks as the input pulse strengthens");
}

inline Verdict subthreshold_oscillation(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& r = run(o, "dc");
    const double t_end = r.trace.t.back();
    const double half = r.onset + 0.5 * (t_end - r.onset);
    const double level_gap = r.train.level - r.train.baseline;
    const auto osc = detect_oscillation(r.trace.t, r.trace.v_k, half, t_end, level_gap);
    v.metric("spikes", static_cast<double>(r.train.size()));
    v.metric("oscillation_amplitude_V", osc.amplitude);
    v.metric("oscillation_frequency_hz", osc.frequency);
    return finish(v, r.train.empty() && osc.present, "sustained sub-threshold oscillation without spikes");
}

inline Verdict integrator(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& near = run(o, "close-pair");
    const auto& far = run(o, "distant-pair");
    const auto& single = run(o, "single");
    v.metric("spikes_close_pair", static_cast<double>(near.train.size()));
    v.metric("spikes_distant_pair", static_cast<double>(far.train.size()));
    v.metric("spikes_single", static_cast<double>(single.train.size()));
    return finish(v, !near.train.empty() && far.train.empty() && single.train.empty(),
                  "two sub-threshold pulses sum to a spike only when close together");
}

inline Verdict bistability(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& th = thresholds();
    const auto& on = run(o, "switch-on");
    const bool persistent = sustained_firing(on, on.onset, v, "on_");
    bool switched_off = false;
    double off_interval = 0;
    for (const auto& r : o) {
        if (r.label.rfind("switch-off@", 0) != 0) continue;
        const double t_end = r.trace.t.back();
        const bool fired_before = spikes_between(r, r.onset, r.onset + 60e-6) > 0;
        const bool quiet = spikes_between(r, t_end - th.quiet_tail, t_end + 1) == 0;
        // silence only counts when the single-pulse run is still firing there
        const bool on_firing = spikes_between(on, t_end - th.quiet_tail, t_end + 1) > 0;
        if (fired_before && quiet && on_firing) {
            switched_off = true;
            off_interval = std::stod(r.label.substr(11)) * 1e-6;
            break;
        }
    }
    v.metric("switch_off_found", switched_off ? 1 : 0);
    if (switched_off) v.metric("switch_off_interval_s", off_interval);
    return finish(v, persistent && switched_off,
                  "one pulse starts persistent spiking, a second pulse at the right phase stops it");
}

inline Verdict inhibition_induced_spiking(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& idle = run(o, "no-input");
    const auto& inh = run(o, "inhibitory-dc");
    v.metric("spikes_no_input", static_cast<double>(idle.train.size()));
    const bool sustained = sustained_firing(inh, inh.onset, v);
    return finish(v, idle.train.empty() && sustained, "quiescent at rest, tonic spiking under a negative d.c. input");
}

inline Verdict inhibition_induced_bursting(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& th = thresholds();
    const auto& idle = run(o, "no-input");
    const auto& inh = run(o, "inhibitory-dc");
    SpikeTrain t = inh.train;
    t.times = spikes_after(inh, inh.onset);
    const auto bm = burst_metrics(t, th.gap_factor);
    v.metric("spikes_no_input", static_cast<double>(idle.train.size()));
    v.metric("spikes", static_cast<double>(t.times.size()));
    v.metric("bursts", static_cast<double>(bm.bursts.size()));
    v.metric("spikes_per_burst", bm.spikes_per_burst);
    const bool bursting = bm.bursts.size() >= th.burst_min_count && bm.spikes_per_burst >= th.burst_min_spikes &&
                          bm.bursts.size() < t.times.size();
    return finish(v, idle.train.empty() && bursting, "quiescent at rest, bursts under a negative d.c. input");
}

inline Verdict all_or_nothing(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    std::vector<double> supra_amps;
    bool sub_silent = true, supra_fire = true;
    for (const auto& r : o) {
        const bool sub = r.label.rfind("sub@", 0) == 0;
        v.metric("spikes@" + r.label, static_cast<double>(r.train.size()));
        if (sub) sub_silent = sub_silent && r.train.empty();
        else {
            supra_fire = supra_fire && !r.train.empty();
            if (!r.train.empty()) supra_amps.push_back(r.train.amplitudes().front());
        }
    }
    bool equal = !supra_amps.empty();
    if (equal) {
        const auto [lo, hi] = std::minmax_element(supra_amps.begin(), supra_amps.end());
        const double spread = (*hi - *lo) / *hi;
        v.metric("suprathreshold_amplitude_spread", spread);
        equal = spread <= thresholds().equal_amplitude_tolerance;
    }
    return finish(v, sub_silent && supra_fire && equal,
                  "no response below threshold, identical spikes for every supra-threshold pulse");
}

inline Verdict refractory_period(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    // absolute: doublet period scan, one spike below T*, two above
    std::vector<std::pair<double, std::size_t>> scan;
    for (const auto& r : o) {
        if (r.label.rfind("doublet@", 0) != 0) continue;
        scan.emplace_back(std::stod(r.label.substr(8)) * 1e-6, r.train.size());
    }
    std::sort(scan.begin(), scan.end());
    bool monotone = !scan.empty();
    bool seen_one = false, seen_two = false;
    double t_star = 0;
    for (std::size_t k = 0; k < scan.size(); ++k) {
        v.metric("spikes@doublet-period-" + std::to_string(static_cast<int>(std::lround(scan[k].first * 1e6))) + "us",
                 static_cast<double>(scan[k].second));
        if (scan[k].second == 1) {
            if (seen_two) monotone = false;
            seen_one = true;
        } else if (scan[k].second == 2) {
            if (!seen_two) t_star = scan[k].first;
            seen_two = true;
        } else {
            monotone = false;
        }
    }
    if (seen_two) v.metric("refractory_bound_s", t_star);
    const bool absolute = monotone && seen_one && seen_two;
    // relative: a doubled second pulse fires where an equal one does not
    bool relative = false;
    for (const auto& r : o) {
        if (r.label.rfind("equal@", 0) != 0) continue;
        const std::string delay = r.label.substr(6);
        const auto& strong = run(o, "double@" + delay);
        const std::size_t n_eq = r.train.size(), n_st = strong.train.size();
        v.metric("spikes@equal-" + delay + "us", static_cast<double>(n_eq));
        v.metric("spikes@double-" + delay + "us", static_cast<double>(n_st));
        if (n_eq == 1 && n_st == 2) relative = true;
    }
    v.metric("relative_window_found", relative ? 1 : 0);
    return finish(v, absolute && relative,
                  "a second pulse inside the refractory window fails; a stronger one fires in the relative window");
}

inline Verdict excitation_block(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& th = thresholds();
    const auto& r = run(o, "ramp");
    const auto s = spikes_after(r, r.onset);
    v.metric("spikes", static_cast<double>(s.size()));
    if (s.size() < 2) return finish(v, false, "spiking above onset, then a locked elevated output at high input");
    const double t_end = r.trace.t.back();
    const double t_last = s.back();
    v.metric("onset_current_A", r.trace.at(r.trace.input, s.front()));
    v.metric("block_current_A", r.trace.at(r.trace.input, t_last));
    // locked: the final 10% of the run shows an elevated, flat output
    const double tail_a = t_end - 0.1 * (t_end - r.onset);
    const double ptp = peak_to_peak(r.trace.t, r.trace.v_k, tail_a, t_end + 1);
    const double tail_level = r.trace.at(r.trace.v_k, t_end);
    v.metric("locked_output_V", tail_level);
    v.metric("tail_swing_V", ptp);
    const bool blocked = t_last < tail_a && tail_level > r.train.baseline + th.block_elevation && ptp < 0.05;
    return finish(v, blocked, "spiking above onset, then a locked elevated output at high input");
}

// ------------------------------------------------------------------ phasic

inline Verdict phasic_spiking(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& r = run(o, "step");
    v.metric("spikes", static_cast<double>(r.train.size()));
    const auto lat = mottsim::spike_latency(r.train, r.onset);
    if (lat) v.metric("latency_s", *lat);
    return finish(v, r.train.size() == 1 && lat && *lat <= thresholds().onset_window,
                  "a single spike at the onset of a sustained input, then silence");
}

inline Verdict phasic_bursting(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& th = thresholds();
    const auto& r = run(o, "step");
    const double t_end = r.trace.t.back();
    const auto s = spikes_after(r, r.onset);
    const auto bm = burst_metrics([&] { SpikeTrain t = r.train; t.times = s; return t; }(), th.gap_factor);
    const double tail_a = t_end - th.phasic_silence_fraction * (t_end - r.onset);
    v.metric("spikes", static_cast<double>(s.size()));
    v.metric("bursts", static_cast<double>(bm.bursts.size()));
    const bool pass = s.size() >= 2 && bm.bursts.size() == 1 && s.front() - r.onset <= th.onset_window &&
                      spikes_between(r, tail_a, t_end + 1) == 0;
    return finish(v, pass, "one burst at the onset of a sustained input, then silence");
}

inline Verdict rebound_spike(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& th = thresholds();
    // main run: a spike follows the release of the inhibitory pulse
    const auto& main = run(o, "release");
    const auto& seg = main.program.segments.front();
    const bool quiet_during = spikes_between(main, 0, seg.t1) == 0;
    const auto after = spikes_after(main, seg.t1);
    const bool rebound = !after.empty() && after.front() - seg.t1 <= th.onset_window;
    v.metric("spikes_after_release", static_cast<double>(after.size()));
    // amplitude and duration thresholds: firing is monotone in strength and both outcomes occur
    auto threshold_exists = [&](const std::string& prefix, const char* what) {
        std::vector<std::pair<double, bool>> pts;
        for (const auto& r : o) {
            if (r.label.rfind(prefix, 0) != 0) continue;
            const auto& sg = r.program.segments.front();
            const double key = prefix == "amp@" ? std::abs(sg.amp) : sg.t1 - sg.t0;
            const bool fired = !spikes_after(r, sg.t1).empty();
            pts.emplace_back(key, fired);
        }
        std::sort(pts.begin(), pts.end());
        bool seen_fire = false, monotone = true, any_silent = false;
        for (const auto& [k, f] : pts) {
            if (f) seen_fire = true;
            else {
                any_silent = true;
                if (seen_fire) monotone = false;
            }
        }
        for (std::size_t k = 1; k < pts.size(); ++k)
            if (pts[k].second && !pts[k - 1].second) v.metric(std::string(what) + "_threshold_bracket", pts[k].first);
        return monotone && seen_fire && any_silent;
    };
    const bool amp_th = threshold_exists("amp@", "amplitude");
    const bool dur_th = threshold_exists("width@", "duration");
    v.metric("amplitude_threshold_found", amp_th ? 1 : 0);
    v.metric("duration_threshold_found", dur_th ? 1 : 0);
    return finish(v, quiet_during && rebound && amp_th && dur_th,
                  "a spike on release from inhibition, gated by both inhibition strength and duration");
}

inline Verdict rebound_burst(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& r = run(o, "release");
    const auto& seg = r.program.segments.front();
    const auto after = spikes_after(r, seg.t1);
    v.metric("spikes_during", static_cast<double>(spikes_between(r, 0, seg.t1)));
    v.metric("spikes_after_release", static_cast<double>(after.size()));
    const bool pass = spikes_between(r, 0, seg.t1) == 0 && after.size() >= 2 &&
                      after.front() - seg.t1 <= thresholds().onset_window;
    return finish(v, pass, "a burst of spikes on release from inhibition");
}

inline Verdict resonator(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& th = thresholds();
    // response per frequency band: output swing within equal slices of the sweep
    auto profile = [&](const RunOutcome& r) {
        const auto& sg = r.program.segments.front();
        std::vector<double> p(th.zap_bins);
        for (std::size_t k = 0; k < th.zap_bins; ++k) {
            const double a = sg.t0 + (sg.t1 - sg.t0) * static_cast<double>(k) / static_cast<double>(th.zap_bins);
            const double b = sg.t0 + (sg.t1 - sg.t0) * static_cast<double>(k + 1) / static_cast<double>(th.zap_bins);
            p[k] = peak_to_peak(r.trace.t, r.trace.v_k, a, b);
        }
        return p;
    };
    const auto cap = profile(run(o, "capacitive"));
    const auto res = profile(run(o, "resistive"));
    const auto cap_peak = static_cast<std::size_t>(std::max_element(cap.begin(), cap.end()) - cap.begin());
    const auto res_peak = static_cast<std::size_t>(std::max_element(res.begin(), res.end()) - res.begin());
    const double low_cap = cap.front() / std::max(cap[cap_peak], 1e-12);
    v.metric("capacitive_peak_band", static_cast<double>(cap_peak));
    v.metric("capacitive_low_to_peak", low_cap);
    v.metric("resistive_peak_band", static_cast<double>(res_peak));
    const bool bandpass = cap_peak > 0 && cap_peak + 1 < th.zap_bins && low_cap < th.resonance_low_fraction &&
                          cap.back() < cap[cap_peak];
    const bool lowpass = static_cast<double>(res_peak) < th.lowpass_peak_share * static_cast<double>(th.zap_bins) &&
                         res.back() < res[res_peak];
    return finish(v, bandpass && lowpass,
                  "capacitive coupling responds in a frequency band; resistive coupling passes low frequencies");
}

inline Verdict threshold_variability(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& exc = run(o, "excitatory");
    const auto& inh = run(o, "inhibitory");
    const auto& pair = run(o, "inhibitory-then-excitatory");
    v.metric("spikes_excitatory", static_cast<double>(exc.train.size()));
    v.metric("spikes_inhibitory", static_cast<double>(inh.train.size()));
    v.metric("spikes_pair", static_cast<double>(pair.train.size()));
    return finish(v, exc.train.empty() && inh.train.empty() && !pair.train.empty(),
                  "a preceding inhibitory pulse lets a sub-threshold excitatory pulse fire");
}

inline Verdict depolarizing_after_potential(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& th = thresholds();
    // after-potential relative to rest, sampled after the first spike
    auto after_potential = [&](const RunOutcome& r) -> std::optional<double> {
        if (r.train.empty()) return std::nullopt;
        const double t = r.train.times.front() + th.after_potential_window;
        return r.trace.at(r.trace.v_k, t) - r.train.baseline;
    };
    std::vector<std::pair<double, double>> ap;
    for (const auto& r : o) {
        if (r.label.rfind("step@", 0) != 0) continue;
        const auto a = after_potential(r);
        v.metric("spikes@" + r.label, static_cast<double>(r.train.size()));
        if (a) {
            v.metric("after_potential_V@" + r.label, *a);
            ap.emplace_back(r.program.segments.front().amp, *a);
        }
    }
    std::sort(ap.begin(), ap.end());
    const bool hap_to_dap = ap.size() >= 2 && ap.front().second < 0 && ap.back().second > 0;
    const auto& strong = run(o, "second-spike");
    v.metric("spikes_strongest", static_cast<double>(strong.train.size()));
    return finish(v, hap_to_dap && strong.train.size() >= 2,
                  "after-potential turns from hyperpolarizing to depolarizing with input strength; a stronger input re-fires");
}

inline Verdict accommodation(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& slow = run(o, "slow-ramp");
    const auto& fast = run(o, "sharp-ramp");
    v.metric("spikes_slow", static_cast<double>(slow.train.size()));
    v.metric("spikes_sharp", static_cast<double>(fast.train.size()));
    return finish(v, slow.train.empty() && !fast.train.empty(),
                  "a slow ramp is accommodated, a sharp ramp to the same level fires");
}

inline Verdict mixed_mode(const Outcomes& o) {
    Verdict v;
    note_rest(v, o);
    const auto& th = thresholds();
    const auto& r = run(o, "step");
    const auto s = spikes_after(r, r.onset);
    const auto isi = intervals(s);
    v.metric("spikes", static_cast<double>(s.size()));
    if (isi.size() < 4) return finish(v, false, "an onset burst followed by regular tonic spiking");
    const std::vector<double> late(isi.begin() + 2, isi.end());
    const double med = detail::median(late);
    v.metric("onset_isi_s", isi.front());
    v.metric("late_median_isi_s", med);
    v.metric("late_isi_cv", cv(late));
    const bool pass = isi.front() <= th.mixed_early_ratio * med && cv(late) <= th.mixed_late_cv &&
                      r.trace.t.back() - s.back() <= th.sustained_isi_multiple * med;
    return finish(v, pass, "an onset burst followed by regular tonic spiking");
}

}  // namespace mottsim::predicates
