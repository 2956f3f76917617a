#pragma once

// Spike-train and trace analysis: spike detection, interval statistics,
// bursts, excitability class, latency, phase-plane checks, amplitude
// recurrence, energy and power figures, switching time.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "mottsim/circuit.hpp"
#include "mottsim/error.hpp"
#include "mottsim/solver.hpp"

namespace mottsim {

struct SpikeDetection {
    double threshold = 0.3;          ///< V above the baseline
    double min_separation = 2e-6;    ///< s
    double baseline_fraction = 0.05; ///< leading fraction of the trace averaged for the baseline
    std::optional<double> baseline;  ///< explicit baseline overrides the estimate

    /// Separation rescaled for small membrane capacitances (reference: nF-scale circuits).
    [[nodiscard]] SpikeDetection scaled_for_capacitance(double c, double c_ref = 5e-9) const {
        SpikeDetection d = *this;
        d.min_separation = min_separation * std::sqrt(c / c_ref);
        return d;
    }
};

struct SpikeTrain {
    std::vector<double> times;  ///< s, parabolic-interpolated peak times
    std::vector<double> peaks;  ///< V, peak value of the output
    double baseline = 0;
    double level = 0;  ///< absolute detection level
    SpikeDetection params;

    [[nodiscard]] std::size_t size() const { return times.size(); }
    [[nodiscard]] bool empty() const { return times.empty(); }

    /// Spike amplitudes above the baseline.
    [[nodiscard]] std::vector<double> amplitudes() const {
        std::vector<double> a(peaks.size());
        for (std::size_t k = 0; k < peaks.size(); ++k) a[k] = peaks[k] - baseline;
        return a;
    }

    [[nodiscard]] std::size_t count_in(double t_begin, double t_end) const {
        return static_cast<std::size_t>(std::count_if(times.begin(), times.end(),
                                                      [&](double t) { return t >= t_begin && t < t_end; }));
    }
};

namespace detail {

inline double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2) return *mid;
    return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

/// Vertex of the parabola through three (possibly unevenly spaced) points.
inline std::pair<double, double> parabola_vertex(double x0, double y0, double x1, double y1, double x2, double y2) {
    const double d0 = (y1 - y0) / (x1 - x0);
    const double d1 = (y2 - y1) / (x2 - x1);
    const double a = (d1 - d0) / (x2 - x0);
    if (!(a < 0)) return {x1, y1};
    const double b = d0 - a * (x0 + x1);
    const double xv = std::clamp(-b / (2 * a), x0, x2);
    const double yv = y0 + (xv - x0) * (d0 + a * (xv - x1));
    return {xv, yv};
}

/// Least-squares line y = a + b x; returns {a, b, r2}.
struct LineFit {
    double intercept = 0, slope = 0, r2 = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    LineFit f;
    if (n < 2) return f;
    const double mx = mean(x), my = mean(y);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (sxx == 0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

}  // namespace detail

/// Local maxima of `v` above baseline + threshold, one per excursion,
/// merged when closer than the minimum separation.
inline SpikeTrain detect_spikes(const std::vector<double>& t, const std::vector<double>& v,
                                const SpikeDetection& params = {}) {
    SpikeTrain train;
    train.params = params;
    const std::size_t n = std::min(t.size(), v.size());
    if (n == 0) return train;
    if (params.baseline) {
        train.baseline = *params.baseline;
    } else {
        const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(params.baseline_fraction * n));
        train.baseline = std::accumulate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), 0.0) / m;
    }
    train.level = train.baseline + params.threshold;

    std::size_t k = 0;
    while (k < n) {
        if (v[k] <= train.level) {
            ++k;
            continue;
        }
        const std::size_t start = k;
        std::size_t best = k;
        while (k < n && v[k] > train.level) {
            if (v[k] > v[best]) best = k;
            ++k;
        }
        // excursions cut by either end of the trace are incomplete
        if (start == 0 || k == n) continue;
        double tp = t[best], vp = v[best];
        if (best > 0 && best + 1 < n) std::tie(tp, vp) = detail::parabola_vertex(t[best - 1], v[best - 1], t[best], v[best], t[best + 1], v[best + 1]);
        if (!train.times.empty() && tp - train.times.back() < params.min_separation) {
            if (vp > train.peaks.back()) {
                train.times.back() = tp;
                train.peaks.back() = vp;
            }
            continue;
        }
        train.times.push_back(tp);
        train.peaks.push_back(vp);
    }
    return train;
}

inline SpikeTrain detect_spikes(const SimulationTrace& tr, const SpikeDetection& params = {}) {
    return detect_spikes(tr.t, tr.v_k, params);
}

// ---------------------------------------------------------------- intervals

struct Histogram {
    double origin = 0;
    double bin_width = 0;
    std::vector<std::size_t> counts;

    [[nodiscard]] double center(std::size_t k) const { return origin + (static_cast<double>(k) + 0.5) * bin_width; }
    [[nodiscard]] std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
};

inline Histogram make_histogram(const std::vector<double>& values, double bin_width, double origin = 0) {
    if (!(bin_width > 0)) throw ConfigError("histogram bin width must be positive");
    Histogram h;
    h.origin = origin;
    h.bin_width = bin_width;
    for (double x : values) {
        if (x < origin) continue;
        const auto k = static_cast<std::size_t>((x - origin) / bin_width);
        if (k >= h.counts.size()) h.counts.resize(k + 1, 0);
        ++h.counts[k];
    }
    return h;
}

struct IntervalStats {
    std::vector<double> isi;
    std::vector<std::pair<double, double>> jisi;
    Histogram histogram;
    bool too_few_for_isi = false;
    bool too_few_for_jisi = false;

    [[nodiscard]] double coefficient_of_variation() const {
        if (isi.size() < 2) return 0.0;
        const double m = detail::mean(isi);
        double s = 0;
        for (double x : isi) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(isi.size() - 1)) / m;
    }
};

inline IntervalStats isi_and_jisi(const SpikeTrain& train, double bin_width = 1e-6) {
    IntervalStats s;
    for (std::size_t k = 1; k < train.times.size(); ++k) s.isi.push_back(train.times[k] - train.times[k - 1]);
    for (std::size_t k = 1; k < s.isi.size(); ++k) s.jisi.emplace_back(s.isi[k - 1], s.isi[k]);
    s.too_few_for_isi = train.size() < 2;
    s.too_few_for_jisi = train.size() < 3;
    s.histogram = make_histogram(s.isi, bin_width);
    return s;
}

/// Local histogram maxima holding at least `min_fraction` of the largest bin.
inline std::vector<double> histogram_modes(const Histogram& h, double min_fraction = 0.1) {
    std::vector<double> modes;
    if (h.counts.empty()) return modes;
    const double top = static_cast<double>(*std::max_element(h.counts.begin(), h.counts.end()));
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        const double c = static_cast<double>(h.counts[k]);
        if (c <= 0 || c < min_fraction * top) continue;
        const std::size_t left = k > 0 ? h.counts[k - 1] : 0;
        const std::size_t right = k + 1 < h.counts.size() ? h.counts[k + 1] : 0;
        // plateaus count once, at their left edge
        if (h.counts[k] > left && h.counts[k] >= right) modes.push_back(h.center(k));
    }
    return modes;
}

/// Smallest histogram mode: the interval the firing is phase-locked to.
/// Refined to the median of the intervals falling within one bin of the mode.
inline std::optional<double> fundamental_isi(const IntervalStats& s) {
    const auto modes = histogram_modes(s.histogram);
    if (modes.empty()) return std::nullopt;
    const double m = modes.front();
    std::vector<double> near;
    for (double x : s.isi)
        if (std::abs(x - m) <= 1.5 * s.histogram.bin_width) near.push_back(x);
    return near.empty() ? m : detail::median(near);
}

// ---------------------------------------------------------------- bursts

struct Burst {
    std::size_t first = 0;  ///< index into the spike train
    std::size_t count = 0;
    double onset = 0;
};

struct BurstMetrics {
    std::vector<Burst> bursts;
    double spikes_per_burst = 0;
    std::optional<double> period;  ///< mean inter-burst-onset interval
};

inline BurstMetrics burst_metrics(const SpikeTrain& train, double gap_factor = 3.0) {
    BurstMetrics m;
    if (train.empty()) return m;
    std::vector<double> isi;
    for (std::size_t k = 1; k < train.size(); ++k) isi.push_back(train.times[k] - train.times[k - 1]);
    const double med = isi.empty() ? 0.0 : detail::median(isi);
    Burst cur{0, 1, train.times[0]};
    for (std::size_t k = 1; k < train.size(); ++k) {
        if (isi[k - 1] > gap_factor * med) {
            m.bursts.push_back(cur);
            cur = Burst{k, 1, train.times[k]};
        } else {
            ++cur.count;
        }
    }
    m.bursts.push_back(cur);
    m.spikes_per_burst = static_cast<double>(train.size()) / static_cast<double>(m.bursts.size());
    if (m.bursts.size() >= 2)
        m.period = (m.bursts.back().onset - m.bursts.front().onset) / static_cast<double>(m.bursts.size() - 1);
    return m;
}

// ---------------------------------------------------------------- excitability

enum class Excitability { NonExcitable, Class1, Class2, Class3 };

inline std::string_view to_string(Excitability e) {
    switch (e) {
        case Excitability::NonExcitable: return "non-excitable";
        case Excitability::Class1: return "class-1";
        case Excitability::Class2: return "class-2";
        case Excitability::Class3: return "class-3";
    }
    return "?";
}

struct FiPoint {
    double current = 0;    ///< stimulus value at the later spike of the pair
    double frequency = 0;  ///< 1 / ISI
};

struct FiCurve {
    std::vector<FiPoint> points;
    std::size_t spike_count = 0;
};

/// Instantaneous-frequency curve of a ramp run: one point per ISI.
inline FiCurve fi_curve(const SimulationTrace& tr, const SpikeTrain& train) {
    FiCurve c;
    c.spike_count = train.size();
    for (std::size_t k = 1; k < train.size(); ++k)
        c.points.push_back({tr.at(tr.input, train.times[k]), 1.0 / (train.times[k] - train.times[k - 1])});
    return c;
}

struct ExcitabilityRule {
    double onset_fraction = 0.25;  ///< Class 1 when the onset frequency is below this share of the maximum
    std::size_t onset_points = 1;  ///< leading f-I points averaged into the onset frequency
};

inline Excitability classify_excitability(const FiCurve& fi, const ExcitabilityRule& rule = {}) {
    if (fi.spike_count == 0) return Excitability::NonExcitable;
    if (fi.points.size() < 2) return Excitability::Class3;
    double f_max = 0;
    for (const auto& p : fi.points) f_max = std::max(f_max, p.frequency);
    const std::size_t m = std::min(rule.onset_points, fi.points.size());
    double f_onset = 0;
    for (std::size_t k = 0; k < m; ++k) f_onset += fi.points[k].frequency;
    f_onset /= static_cast<double>(m);
    std::vector<double> x, y;
    for (const auto& p : fi.points) {
        x.push_back(p.current);
        y.push_back(p.frequency);
    }
    const auto line = detail::fit_line(x, y);
    if (f_onset < rule.onset_fraction * f_max && line.slope > 0) return Excitability::Class1;
    return Excitability::Class2;
}

// ---------------------------------------------------------------- latency

inline std::optional<double> spike_latency(const SpikeTrain& train, double onset) {
    for (double t : train.times)
        if (t >= onset) return t - onset;
    return std::nullopt;
}

struct LogFit {
    double tau0 = 0;  ///< s
    double b = 0;     ///< s per ln(V)
    double e = 0;     ///< V, asymptote
    double r2 = 0;
};

/// Least-squares fit of latency = tau0 + b ln(E - v) over E > max(v).
inline LogFit fit_latency(const std::vector<double>& v, const std::vector<double>& latency) {
    if (v.size() != latency.size() || v.size() < 3) throw ConfigError("latency fit needs at least 3 points");
    const double v_max = *std::max_element(v.begin(), v.end());
    const double v_min = *std::min_element(v.begin(), v.end());
    const double span = std::max(v_max - v_min, 1e-6);
    auto fit_at = [&](double e) {
        std::vector<double> x(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) x[k] = std::log(e - v[k]);
        const auto l = detail::fit_line(x, latency);
        return LogFit{l.intercept, l.slope, e, l.r2};
    };
    // offsets above max(v) on a log grid, then golden-section refinement
    LogFit best = fit_at(v_max + 1e-6 * span);
    double best_off = 1e-6 * span;
    for (double off = 1e-6 * span; off < 100 * span; off *= 1.05) {
        const LogFit f = fit_at(v_max + off);
        if (f.r2 > best.r2) {
            best = f;
            best_off = off;
        }
    }
    double a = std::log(best_off / 1.05), b = std::log(best_off * 1.05);
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 80; ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (fit_at(v_max + std::exp(c)).r2 > fit_at(v_max + std::exp(d)).r2) b = d;
        else a = c;
    }
    const LogFit refined = fit_at(v_max + std::exp(0.5 * (a + b)));
    return refined.r2 > best.r2 ? refined : best;
}

// ---------------------------------------------------------------- phase plane

struct PhasePoint {
    double v_na = 0, v_k = 0;
};

/// (V_Na, V_K) trajectory, keeping every `decimate`-th sample.
inline std::vector<PhasePoint> phase_plane(const SimulationTrace& tr, std::size_t decimate = 1) {
    std::vector<PhasePoint> p;
    decimate = std::max<std::size_t>(decimate, 1);
    for (std::size_t k = 0; k < tr.size(); k += decimate) p.push_back({tr.v_na[k], tr.v_k[k]});
    return p;
}

inline double trajectory_diameter(const std::vector<PhasePoint>& p) {
    if (p.empty()) return 0.0;
    auto [na_lo, na_hi] = std::minmax_element(p.begin(), p.end(), [](auto& a, auto& b) { return a.v_na < b.v_na; });
    auto [k_lo, k_hi] = std::minmax_element(p.begin(), p.end(), [](auto& a, auto& b) { return a.v_k < b.v_k; });
    return std::hypot(na_hi->v_na - na_lo->v_na, k_hi->v_k - k_lo->v_k);
}

struct LimitCycleCheck {
    bool closed = false;
    double max_deviation = 0;  ///< worst distance to the reference loop, in units of the diameter
};

/// Tail half of the trajectory compared against its last complete loop
/// (the segment between the last two spikes).
inline LimitCycleCheck limit_cycle_check(const SimulationTrace& tr, const SpikeTrain& train, double tube = 0.05) {
    LimitCycleCheck r;
    if (train.size() < 3 || tr.empty()) return r;
    const double t_half = tr.t.front() + 0.5 * (tr.t.back() - tr.t.front());
    const std::size_t loop_a = tr.index_at(train.times[train.size() - 2]);
    const std::size_t loop_b = tr.index_at(train.times.back());
    // the tail half must contain at least one full reference loop
    if (loop_b <= loop_a + 2 || train.times[train.size() - 2] < t_half) return r;
    std::vector<PhasePoint> loop;
    for (std::size_t k = loop_a; k <= loop_b; ++k) loop.push_back({tr.v_na[k], tr.v_k[k]});
    std::vector<PhasePoint> tail;
    // stop at the last spike: the stretch after it is an unfinished loop
    for (std::size_t k = tr.index_at(t_half); k <= loop_b; ++k) tail.push_back({tr.v_na[k], tr.v_k[k]});
    const double diameter = trajectory_diameter(tail);
    if (!(diameter > 0)) return r;
    double worst = 0;
    for (const auto& q : tail) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j + 1 < loop.size(); ++j) {
            // distance to the polyline segment
            const double ax = loop[j].v_na, ay = loop[j].v_k;
            const double bx = loop[j + 1].v_na - ax, by = loop[j + 1].v_k - ay;
            const double len2 = bx * bx + by * by;
            double s = len2 > 0 ? ((q.v_na - ax) * bx + (q.v_k - ay) * by) / len2 : 0.0;
            s = std::clamp(s, 0.0, 1.0);
            best = std::min(best, std::hypot(q.v_na - ax - s * bx, q.v_k - ay - s * by));
        }
        worst = std::max(worst, best);
    }
    r.max_deviation = worst / diameter;
    r.closed = r.max_deviation <= tube;
    return r;
}

// ---------------------------------------------------------------- amplitudes

struct AmplitudeRecurrence {
    std::vector<std::pair<double, double>> pairs;
    double mean = 0;
    double skewness = 0;
    bool too_few = false;
};

inline double sample_skewness(const std::vector<double>& a) {
    if (a.size() < 3) return 0.0;
    const double m = detail::mean(a);
    double m2 = 0, m3 = 0;
    for (double x : a) {
        m2 += (x - m) * (x - m);
        m3 += (x - m) * (x - m) * (x - m);
    }
    m2 /= static_cast<double>(a.size());
    m3 /= static_cast<double>(a.size());
    if (m2 <= 1e-30 * m * m || m2 == 0) return 0.0;
    return m3 / std::pow(m2, 1.5);
}

/// Works on the raw peak values; pass amplitudes() for baseline-relative values.
inline AmplitudeRecurrence amplitude_recurrence(const std::vector<double>& amplitudes) {
    AmplitudeRecurrence r;
    r.too_few = amplitudes.size() < 3;
    for (std::size_t k = 1; k < amplitudes.size(); ++k) r.pairs.emplace_back(amplitudes[k - 1], amplitudes[k]);
    r.mean = detail::mean(amplitudes);
    r.skewness = sample_skewness(amplitudes);
    return r;
}

inline AmplitudeRecurrence amplitude_recurrence(const SpikeTrain& train) { return amplitude_recurrence(train.peaks); }

// ---------------------------------------------------------------- oscillation

struct Oscillation {
    bool present = false;
    double frequency = 0;  ///< Hz
    double amplitude = 0;  ///< V, single-sided peak amplitude of the dominant component
};

/// Dominant spectral line of `v` over [t_begin, t_end]: an oscillation when
/// its amplitude lies in [min_amplitude, max_amplitude] and at least
/// `min_cycles` periods fit in the window.
inline Oscillation detect_oscillation(const std::vector<double>& t, const std::vector<double>& v, double t_begin,
                                      double t_end, double max_amplitude, double min_amplitude = 5e-3,
                                      double min_cycles = 3) {
    Oscillation o;
    if (t.size() < 8 || !(t_end > t_begin)) return o;
    const std::size_t n = 2048;
    const double dt = (t_end - t_begin) / static_cast<double>(n);
    std::vector<double> y(n);
    auto it = t.begin();
    for (std::size_t k = 0; k < n; ++k) {
        const double tk = t_begin + (static_cast<double>(k) + 0.5) * dt;
        it = std::lower_bound(it, t.end(), tk);
        if (it == t.end()) it = t.end() - 1;
        const auto j = static_cast<std::size_t>(it - t.begin());
        if (j == 0) y[k] = v[0];
        else {
            const double w = (tk - t[j - 1]) / (t[j] - t[j - 1]);
            y[k] = v[j - 1] + std::clamp(w, 0.0, 1.0) * (v[j] - v[j - 1]);
        }
    }
    // remove mean and linear drift so ramps do not masquerade as low-frequency lines
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = static_cast<double>(k);
    const auto line = detail::fit_line(x, y);
    for (std::size_t k = 0; k < n; ++k) y[k] -= line.intercept + line.slope * x[k];
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, y);
    const auto k_min = static_cast<std::size_t>(std::ceil(min_cycles));
    std::size_t k_best = 0;
    double a_best = 0;
    for (std::size_t k = std::max<std::size_t>(k_min, 1); k < n / 2; ++k) {
        const double a = 2.0 * std::abs(spec[k]) / static_cast<double>(n);
        if (a > a_best) {
            a_best = a;
            k_best = k;
        }
    }
    o.frequency = static_cast<double>(k_best) / (t_end - t_begin);
    o.amplitude = a_best;
    o.present = k_best > 0 && a_best >= min_amplitude && a_best <= max_amplitude;
    return o;
}

/// Largest peak-to-peak swing of `v` over [t_begin, t_end).
inline double peak_to_peak(const std::vector<double>& t, const std::vector<double>& v, double t_begin, double t_end) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] < t_begin || t[k] >= t_end) continue;
        lo = std::min(lo, v[k]);
        hi = std::max(hi, v[k]);
    }
    return hi > lo ? hi - lo : 0.0;
}

// ---------------------------------------------------------------- energy and power

/// Supply energy above the static baseline over [t_begin, t_end]. The window
/// must contain exactly one spike of `train`.
inline double dynamic_spike_energy(const SimulationTrace& tr, const SpikeTrain& train, double t_begin, double t_end,
                                   double static_power) {
    if (!(t_end > t_begin)) throw ConfigError("spike window must have t_end > t_begin");
    const std::size_t n = train.count_in(t_begin, t_end);
    if (n != 1)
        throw NumericalError(n == 0 ? "no spike inside the energy window"
                                    : "overlapping spikes inside the energy window; lower the spike rate",
                             t_begin);
    return tr.at(tr.e_supply, t_end) - tr.at(tr.e_supply, t_begin) - static_power * (t_end - t_begin);
}

/// Per-spike dynamic energy of a periodic train: windows run between the
/// midpoints of neighbouring intervals, skipping the first `skip` spikes.
inline std::vector<double> periodic_spike_energies(const SimulationTrace& tr, const SpikeTrain& train,
                                                   double static_power, std::size_t skip = 1) {
    std::vector<double> e;
    for (std::size_t k = std::max<std::size_t>(skip, 1); k + 1 < train.size(); ++k) {
        const double a = 0.5 * (train.times[k - 1] + train.times[k]);
        const double b = 0.5 * (train.times[k] + train.times[k + 1]);
        e.push_back(dynamic_spike_energy(tr, train, a, b, static_power));
    }
    return e;
}

struct PowerBounds {
    double lower = 0;  ///< both devices biased at V_th / 2
    double upper = 0;  ///< both devices biased at V_th
};

/// Standby dissipation of the two biased devices through their insulating-state branches.
inline PowerBounds static_power_bounds(const NeuronCircuit& circuit, double v_th) {
    const DeviceBranch b1(circuit.dev1), b2(circuit.dev2);
    const double g = 1.0 / b1.resistance(kStateFloor) + 1.0 / b2.resistance(kStateFloor);
    return {0.25 * v_th * v_th * g, v_th * v_th * g};
}

// ---------------------------------------------------------------- switching

/// Mean 10-90 % rise time of the channel current over insulating-to-metallic
/// edges. An edge is a crossing of the mid level between the trace's minimum
/// and maximum; its foot and crest are the nearest turning points.
inline std::optional<double> switching_time(const std::vector<double>& t, const std::vector<double>& i) {
    if (t.size() < 4) return std::nullopt;
    const auto [lo_it, hi_it] = std::minmax_element(i.begin(), i.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) return std::nullopt;
    const double mid = 0.5 * (lo + hi);
    auto cross = [&](std::size_t a, std::size_t b, double level) {
        for (std::size_t k = a; k < b; ++k)
            if (i[k] <= level && i[k + 1] > level)
                return t[k] + (level - i[k]) / (i[k + 1] - i[k]) * (t[k + 1] - t[k]);
        return std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<double> rises;
    for (std::size_t k = 0; k + 1 < i.size(); ++k) {
        if (!(i[k] <= mid && i[k + 1] > mid)) continue;
        std::size_t foot = k;
        while (foot > 0 && i[foot - 1] <= i[foot]) --foot;
        std::size_t crest = k + 1;
        while (crest + 1 < i.size() && i[crest + 1] >= i[crest]) ++crest;
        if (foot == 0 || crest + 1 == i.size()) continue;  // edge cut by the trace ends
        const double a = i[foot], b = i[crest];
        const double t10 = cross(foot, crest, a + 0.1 * (b - a));
        const double t90 = cross(foot, crest, a + 0.9 * (b - a));
        if (std::isfinite(t10) && std::isfinite(t90) && t90 > t10) rises.push_back(t90 - t10);
        k = crest;
    }
    if (rises.empty()) return std::nullopt;
    return detail::mean(rises);
}

inline std::optional<double> switching_time(const SimulationTrace& tr) { return switching_time(tr.t, tr.i1); }

// ---------------------------------------------------------------- convergence

struct ConvergenceRow {
    double tolerance_scale = 1;  ///< multiplier on the base solver tolerances
    std::optional<double> first_spike;
    std::optional<double> drift;  ///< |t_k - t_{k+1}| / t_{k+1} against the next finer level
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    bool spiking = false;
    bool converged = true;  ///< drifts non-increasing or below the plateau floor
};

/// Reruns the same experiment at decreasing tolerances and tracks the first
/// spike time. `run(scale)` returns the spike train for a tolerance scale.
template <class Run>
ConvergenceReport convergence_report(Run&& run, std::vector<double> ladder, double t_ref = 0,
                                     double plateau = 1e-6) {
    if (ladder.size() < 2) throw ConfigError("convergence ladder needs at least two tolerance levels");
    std::sort(ladder.begin(), ladder.end(), std::greater<>());
    ConvergenceReport rep;
    for (double s : ladder) {
        ConvergenceRow row;
        row.tolerance_scale = s;
        const SpikeTrain train = run(s);
        if (!train.empty()) row.first_spike = train.times.front() - t_ref;
        rep.rows.push_back(row);
    }
    rep.spiking = std::all_of(rep.rows.begin(), rep.rows.end(), [](auto& r) { return r.first_spike.has_value(); });
    if (!rep.spiking) {
        rep.rows.clear();
        return rep;
    }
    for (std::size_t k = 0; k + 1 < rep.rows.size(); ++k)
        rep.rows[k].drift = std::abs(*rep.rows[k].first_spike - *rep.rows[k + 1].first_spike) /
                            std::abs(*rep.rows[k + 1].first_spike);
    for (std::size_t k = 1; k + 1 < rep.rows.size(); ++k)
        if (*rep.rows[k].drift > *rep.rows[k - 1].drift && *rep.rows[k].drift > plateau) rep.converged = false;
    return rep;
}

template <class Run>
ConvergenceReport convergence_report(Run&& run, std::initializer_list<double> ladder, double t_ref = 0) {
    return convergence_report(std::forward<Run>(run), std::vector<double>(ladder), t_ref);
}

}  // namespace mottsim
