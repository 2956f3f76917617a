#pragma once

// Stimulus programs: ordered, non-overlapping waveform segments plus optional
// piecewise-constant noise, in current clamp or voltage clamp.
//
// Line-oriented protocol grammar (one statement per line, '#' comments):
//
//   mode current|voltage
//   isolator gain=0.1mA/V            voltage amplitudes drive current clamp
//   noise pp=5uA hold=100ns seed=1   uniform, piecewise constant, zero mean
//   dc      t0=0 t1=35ms amp=82.5uA
//   pulse   t0=0 width=10us amp=0.25V
//   doublet t0=0 width=10us interval=20us amp=0.25V [amp2=0.5V]
//   ramp    t0=0 t1=1ms from=0uA to=150uA
//   zap     t0=0 t1=2ms amp=0.6V f0=1kHz f1=40kHz [offset=0V]
//   silence t0=0 t1=10us
//
// Without a `mode` line the mode follows the unit of the first amplitude.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mottsim/circuit.hpp"
#include "mottsim/error.hpp"
#include "mottsim/units.hpp"

namespace mottsim {

enum class SegmentKind { Dc, Pulse, Doublet, Ramp, Zap, Silence };

inline std::string_view to_string(SegmentKind k) {
    switch (k) {
        case SegmentKind::Dc: return "dc";
        case SegmentKind::Pulse: return "pulse";
        case SegmentKind::Doublet: return "doublet";
        case SegmentKind::Ramp: return "ramp";
        case SegmentKind::Zap: return "zap";
        case SegmentKind::Silence: return "silence";
    }
    return "?";
}

/// Which one-sided limit to take at a discontinuity.
enum class Side { Left, Right };

struct Segment {
    SegmentKind kind = SegmentKind::Dc;
    double t0 = 0;
    double t1 = 0;
    double amp = 0;       ///< dc/pulse/zap amplitude, first doublet pulse, ramp start
    double amp2 = 0;      ///< second doublet pulse, ramp end
    double width = 0;     ///< pulse and doublet pulse width
    double interval = 0;  ///< doublet onset-to-onset period
    double f_start = 0;
    double f_end = 0;
    double offset = 0;    ///< zap offset

    bool operator==(const Segment&) const = default;

    [[nodiscard]] bool contains(double t, Side side) const {
        return side == Side::Right ? (t >= t0 && t < t1) : (t > t0 && t <= t1);
    }

    /// Deterministic value at t (assumed inside the segment).
    [[nodiscard]] double value(double t, Side side) const {
        const double tau = t - t0;
        switch (kind) {
            case SegmentKind::Dc: return amp;
            case SegmentKind::Silence: return 0.0;
            case SegmentKind::Pulse: return amp;
            case SegmentKind::Doublet: {
                const double t2 = t0 + interval;
                auto inside = [&](double a, double b) {
                    return side == Side::Right ? (t >= a && t < b) : (t > a && t <= b);
                };
                if (inside(t0, t0 + width)) return amp;
                if (inside(t2, t2 + width)) return amp2;
                return 0.0;
            }
            case SegmentKind::Ramp: return amp + (amp2 - amp) * tau / (t1 - t0);
            case SegmentKind::Zap: {
                const double T = t1 - t0;
                const double phase = 2.0 * std::numbers::pi * (f_start * tau + 0.5 * (f_end - f_start) * tau * tau / T);
                return offset + amp * std::sin(phase);
            }
        }
        return 0.0;
    }

    [[nodiscard]] double slope(double t) const {
        const double tau = t - t0;
        switch (kind) {
            case SegmentKind::Ramp: return (amp2 - amp) / (t1 - t0);
            case SegmentKind::Zap: {
                const double T = t1 - t0;
                const double f = f_start + (f_end - f_start) * tau / T;
                const double phase = 2.0 * std::numbers::pi * (f_start * tau + 0.5 * (f_end - f_start) * tau * tau / T);
                return amp * std::cos(phase) * 2.0 * std::numbers::pi * f;
            }
            default: return 0.0;
        }
    }

    [[nodiscard]] double instantaneous_frequency(double t) const {
        if (kind != SegmentKind::Zap) return 0.0;
        return f_start + (f_end - f_start) * (t - t0) / (t1 - t0);
    }

    void append_breakpoints(std::vector<double>& out) const {
        out.push_back(t0);
        out.push_back(t1);
        if (kind == SegmentKind::Doublet) {
            out.push_back(t0 + width);
            out.push_back(t0 + interval);
        }
    }

    void scale(double k) {
        amp *= k;
        amp2 *= k;
        offset *= k;
    }
};

struct NoiseSpec {
    double peak_to_peak = 0;
    double hold = 100e-9;
    std::uint64_t seed = 0;

    bool operator==(const NoiseSpec&) const = default;
};

struct StimulusProgram {
    InputMode mode = InputMode::Current;
    std::vector<Segment> segments;  ///< sorted by t0, non-overlapping
    std::optional<NoiseSpec> noise;
    double isolator_gain = 1e-4;  ///< A/V
    bool isolator = false;        ///< `isolator` statement present

    bool operator==(const StimulusProgram&) const = default;

    [[nodiscard]] double start() const { return segments.empty() ? 0.0 : segments.front().t0; }
    [[nodiscard]] double end() const {
        double e = 0;
        for (const auto& s : segments) e = std::max(e, s.t1);
        return e;
    }

    [[nodiscard]] double deterministic(double t, Side side = Side::Right) const {
        // segments are sorted and disjoint: last segment with t0 <= t
        auto it = std::upper_bound(segments.begin(), segments.end(), t,
                                   [](double v, const Segment& s) { return v < s.t0; });
        if (side == Side::Left) {
            // for the left limit a segment starting exactly at t does not apply
            while (it != segments.begin() && std::prev(it)->t0 >= t) --it;
        }
        if (it == segments.begin()) return 0.0;
        const Segment& s = *std::prev(it);
        return s.contains(t, side) ? s.value(t, side) : 0.0;
    }

    [[nodiscard]] double deterministic_slope(double t) const {
        for (const auto& s : segments)
            if (s.contains(t, Side::Right)) return s.slope(t);
        return 0.0;
    }

    [[nodiscard]] std::vector<double> breakpoints() const {
        std::vector<double> out;
        for (const auto& s : segments) s.append_breakpoints(out);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    void validate() const {
        for (std::size_t k = 0; k < segments.size(); ++k) {
            const auto& s = segments[k];
            if (!(s.t1 > s.t0)) throw ConfigError("stimulus segment " + std::to_string(k + 1) + ": t1 must exceed t0");
            if (s.kind == SegmentKind::Zap && !(s.f_start > 0 && s.f_end > 0))
                throw ConfigError("zap frequencies must be positive");
            if (s.kind == SegmentKind::Doublet && !(s.interval >= s.width && s.width > 0))
                throw ConfigError("doublet needs width > 0 and interval >= width");
            if (k > 0 && s.t0 < segments[k - 1].t1)
                throw ConfigError("stimulus segments " + std::to_string(k) + " and " + std::to_string(k + 1) + " overlap");
        }
        if (noise && !(noise->peak_to_peak >= 0 && noise->hold > 0))
            throw ConfigError("noise needs pp >= 0 and hold > 0");
    }
};

/// Realized noise for one run: one uniform draw per hold interval over
/// [0, end). Identical (program, seed, run) give identical values.
class NoiseTrack {
public:
    NoiseTrack() = default;

    NoiseTrack(const StimulusProgram& program, std::uint64_t run_index = 0) {
        if (!program.noise || program.noise->peak_to_peak == 0) return;
        hold_ = program.noise->hold;
        const double span = program.end();
        const auto n = static_cast<std::size_t>(std::ceil(span / hold_)) + 1;
        std::seed_seq seq{static_cast<std::uint32_t>(program.noise->seed),
                          static_cast<std::uint32_t>(program.noise->seed >> 32),
                          static_cast<std::uint32_t>(run_index), static_cast<std::uint32_t>(run_index >> 32)};
        std::mt19937_64 gen(seq);
        const double half = 0.5 * program.noise->peak_to_peak;
        values_.resize(n);
        for (auto& v : values_) {
            // 53 random bits -> [0, 1)
            const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
            v = half * (2.0 * unit - 1.0);
        }
        end_ = span;
    }

    [[nodiscard]] bool empty() const { return values_.empty(); }
    [[nodiscard]] double hold() const { return hold_; }

    [[nodiscard]] double value(double t, Side side = Side::Right) const {
        if (values_.empty() || t < 0 || t > end_) return 0.0;
        const double x = t / hold_;
        double k = std::floor(x);
        if (side == Side::Left && k == x) k -= 1;
        if (k < 0) return 0.0;
        const auto idx = static_cast<std::size_t>(k);
        return idx < values_.size() ? values_[idx] : 0.0;
    }

    /// Next hold boundary strictly after t.
    [[nodiscard]] double next_boundary(double t) const {
        if (values_.empty() || t >= end_) return std::numeric_limits<double>::infinity();
        double k = std::floor(t / hold_) + 1;
        double b = k * hold_;
        while (b <= t) b = (++k) * hold_;
        return b;
    }

private:
    std::vector<double> values_;
    double hold_ = 0;
    double end_ = 0;
};

/// A program bound to its noise realization; the stimulus as seen by the solver.
class StimulusSource {
public:
    StimulusSource() = default;
    explicit StimulusSource(StimulusProgram program, std::uint64_t run_index = 0)
        : program_(std::move(program)), noise_(program_, run_index), breaks_(program_.breakpoints()) {}

    [[nodiscard]] const StimulusProgram& program() const { return program_; }
    [[nodiscard]] InputMode mode() const { return program_.mode; }

    [[nodiscard]] double value(double t, Side side = Side::Right) const {
        return program_.deterministic(t, side) + noise_.value(t, side);
    }

    [[nodiscard]] double slope(double t) const { return program_.deterministic_slope(t); }

    /// Smallest discontinuity strictly after t (segment edges, noise holds).
    [[nodiscard]] double next_breakpoint(double t) const {
        auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
        const double seg = it == breaks_.end() ? std::numeric_limits<double>::infinity() : *it;
        return std::min(seg, noise_.next_boundary(t));
    }

private:
    StimulusProgram program_;
    NoiseTrack noise_;
    std::vector<double> breaks_;
};

/// Sample the program (deterministic part plus noise of run `run_index`).
inline double sample(const StimulusProgram& program, double t, const NoiseTrack& noise) {
    if (t < 0 || t > program.end()) return 0.0;
    return program.deterministic(t) + noise.value(t);
}

inline StimulusProgram to_current_clamp(const StimulusProgram& program) {
    if (program.mode == InputMode::Current) return program;
    StimulusProgram out = program;
    out.mode = InputMode::Current;
    for (auto& s : out.segments) s.scale(program.isolator_gain);
    if (out.noise) out.noise->peak_to_peak *= program.isolator_gain;
    return out;
}

namespace detail {

struct Token {
    std::string key;
    std::string value;
    int column = 0;
};

inline std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::string_view word = line.substr(start, i - start);
        Token tok;
        tok.column = static_cast<int>(start) + 1;
        if (auto eq = word.find('='); eq != std::string_view::npos) {
            tok.key = std::string(word.substr(0, eq));
            tok.value = std::string(word.substr(eq + 1));
        } else {
            tok.key = std::string(word);
        }
        out.push_back(std::move(tok));
    }
    return out;
}

class LineParser {
public:
    LineParser(std::vector<Token> toks, int line) : toks_(std::move(toks)), line_(line) {}

    const Token* find(std::string_view key) const {
        for (std::size_t k = 1; k < toks_.size(); ++k)
            if (toks_[k].key == key) return &toks_[k];
        return nullptr;
    }

    units::Quantity quantity(std::string_view key, bool required = true, double fallback = 0) const {
        const Token* t = find(key);
        if (!t) {
            if (required) throw ParseError("missing '" + std::string(key) + "='", line_, toks_.front().column);
            return {fallback, units::Dim::None};
        }
        auto q = units::parse_quantity(t->value);
        if (!q) throw ParseError("malformed value '" + t->value + "' for '" + t->key + "'", line_, t->column);
        return *q;
    }

    double time(std::string_view key, bool required = true, double fallback = 0) const {
        const Token* t = find(key);
        auto q = quantity(key, required, fallback);
        if (t && q.dim != units::Dim::Time && q.dim != units::Dim::None)
            throw ParseError("'" + t->key + "' expects a time, got " + std::string(units::to_string(q.dim)), line_,
                             t->column);
        return q.value;
    }

    double frequency(std::string_view key) const {
        const Token* t = find(key);
        auto q = quantity(key);
        if (q.dim != units::Dim::Frequency && q.dim != units::Dim::None)
            throw ParseError("'" + t->key + "' expects a frequency", line_, t->column);
        return q.value;
    }

    void check_keys(std::initializer_list<std::string_view> allowed) const {
        for (std::size_t k = 1; k < toks_.size(); ++k) {
            const auto& t = toks_[k];
            if (std::find(allowed.begin(), allowed.end(), t.key) == allowed.end())
                throw ParseError("unknown keyword '" + t.key + "' for '" + toks_.front().key + "'", line_, t.column);
            if (t.value.empty()) throw ParseError("'" + t.key + "' needs a value", line_, t.column);
        }
    }

    const Token& head() const { return toks_.front(); }
    int line() const { return line_; }

private:
    std::vector<Token> toks_;
    int line_;
};

}  // namespace detail

/// Parses protocol text. Errors carry the line and column of the offending token.
inline StimulusProgram parse_protocol(std::string_view text) {
    StimulusProgram prog;
    std::optional<InputMode> explicit_mode;
    // amplitudes are resolved after the whole text is read (mode/isolator may follow)
    struct PendingAmp {
        double* target;
        units::Quantity q;
        int line, column;
    };
    std::vector<PendingAmp> amps;
    std::vector<std::pair<int, int>> seg_locations;
    std::optional<std::pair<int, int>> noise_location;

    int line_no = 0;
    std::size_t pos = 0;
    std::vector<std::vector<detail::Token>> seg_tokens;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto toks = detail::tokenize(line);
        if (toks.empty()) {
            if (nl == text.size()) break;
            continue;
        }
        const detail::LineParser lp(toks, line_no);
        const std::string kw = toks.front().key;
        if (!toks.front().value.empty())
            throw ParseError("statement must start with a keyword", line_no, toks.front().column);
        if (kw == "mode") {
            if (toks.size() != 2 || !toks[1].value.empty())
                throw ParseError("expected 'mode current' or 'mode voltage'", line_no, toks.front().column);
            if (toks[1].key == "current") explicit_mode = InputMode::Current;
            else if (toks[1].key == "voltage") explicit_mode = InputMode::Voltage;
            else throw ParseError("unknown mode '" + toks[1].key + "'", line_no, toks[1].column);
        } else if (kw == "isolator") {
            lp.check_keys({"gain"});
            prog.isolator = true;
            if (lp.find("gain")) {
                const auto* t = lp.find("gain");
                // accept "1e-4" (A/V) or "0.1mA/V"
                std::string v = t->value;
                double scale = 1.0;
                if (v.size() > 2 && v.substr(v.size() - 2) == "/V") v = v.substr(0, v.size() - 2);
                auto q = units::parse_quantity(v);
                if (!q || (q->dim != units::Dim::Current && q->dim != units::Dim::None))
                    throw ParseError("isolator gain must be a current per volt", line_no, t->column);
                prog.isolator_gain = q->value * scale;
            }
        } else if (kw == "noise") {
            lp.check_keys({"pp", "hold", "seed"});
            NoiseSpec n;
            n.hold = lp.time("hold", false, 100e-9);
            if (const auto* s = lp.find("seed")) {
                try {
                    n.seed = std::stoull(s->value);
                } catch (...) {
                    throw ParseError("seed must be a non-negative integer", line_no, s->column);
                }
            }
            prog.noise = n;
            noise_location = {line_no, lp.find("pp") ? lp.find("pp")->column : 1};
            amps.push_back({&prog.noise->peak_to_peak, lp.quantity("pp"), line_no,
                            lp.find("pp")->column});
        } else {
            Segment s;
            if (kw == "dc") {
                lp.check_keys({"t0", "t1", "amp"});
                s.kind = SegmentKind::Dc;
                s.t0 = lp.time("t0");
                s.t1 = lp.time("t1");
            } else if (kw == "pulse") {
                lp.check_keys({"t0", "width", "amp"});
                s.kind = SegmentKind::Pulse;
                s.t0 = lp.time("t0");
                s.width = lp.time("width");
                s.t1 = s.t0 + s.width;
            } else if (kw == "doublet") {
                lp.check_keys({"t0", "width", "interval", "amp", "amp2"});
                s.kind = SegmentKind::Doublet;
                s.t0 = lp.time("t0");
                s.width = lp.time("width");
                s.interval = lp.time("interval");
                s.t1 = s.t0 + s.interval + s.width;
            } else if (kw == "ramp") {
                lp.check_keys({"t0", "t1", "from", "to"});
                s.kind = SegmentKind::Ramp;
                s.t0 = lp.time("t0");
                s.t1 = lp.time("t1");
            } else if (kw == "zap") {
                lp.check_keys({"t0", "t1", "amp", "f0", "f1", "offset"});
                s.kind = SegmentKind::Zap;
                s.t0 = lp.time("t0");
                s.t1 = lp.time("t1");
                s.f_start = lp.frequency("f0");
                s.f_end = lp.frequency("f1");
                if (!(s.f_start > 0 && s.f_end > 0))
                    throw ParseError("zap frequencies must be positive", line_no, toks.front().column);
            } else if (kw == "silence") {
                lp.check_keys({"t0", "t1"});
                s.kind = SegmentKind::Silence;
                s.t0 = lp.time("t0");
                s.t1 = lp.time("t1");
            } else {
                throw ParseError("unknown keyword '" + kw + "'", line_no, toks.front().column);
            }
            if (!(s.t1 > s.t0)) throw ParseError("segment must have positive duration", line_no, toks.front().column);
            prog.segments.push_back(s);
            seg_locations.emplace_back(line_no, toks.front().column);
            seg_tokens.push_back(toks);
        }
        if (nl == text.size()) break;
    }

    // amplitude fields, collected once segment storage is stable
    for (std::size_t k = 0; k < prog.segments.size(); ++k) {
        const detail::LineParser lp(seg_tokens[k], seg_locations[k].first);
        auto& s = prog.segments[k];
        auto add = [&](double* target, std::string_view key, bool required) {
            const auto* t = lp.find(key);
            if (!t && !required) return false;
            amps.push_back({target, lp.quantity(key), lp.line(), t ? t->column : lp.head().column});
            return true;
        };
        switch (s.kind) {
            case SegmentKind::Dc:
            case SegmentKind::Pulse: add(&s.amp, "amp", true); break;
            case SegmentKind::Doublet:
                add(&s.amp, "amp", true);
                if (!add(&s.amp2, "amp2", false)) amps.push_back({&s.amp2, amps.back().q, lp.line(), 0});
                break;
            case SegmentKind::Ramp:
                add(&s.amp, "from", true);
                add(&s.amp2, "to", true);
                break;
            case SegmentKind::Zap:
                add(&s.amp, "amp", true);
                add(&s.offset, "offset", false);
                break;
            case SegmentKind::Silence: break;
        }
    }

    // resolve mode from the first dimensioned amplitude when not stated
    if (explicit_mode) {
        prog.mode = *explicit_mode;
    } else {
        prog.mode = InputMode::Current;
        for (const auto& a : amps) {
            if (a.q.dim == units::Dim::Voltage) {
                prog.mode = prog.isolator ? InputMode::Current : InputMode::Voltage;
                break;
            }
            if (a.q.dim == units::Dim::Current) break;
        }
    }
    for (const auto& a : amps) {
        double v = a.q.value;
        switch (a.q.dim) {
            case units::Dim::None: break;
            case units::Dim::Current:
                if (prog.mode == InputMode::Voltage)
                    throw ParseError("current amplitude in a voltage-clamp program", a.line, a.column);
                break;
            case units::Dim::Voltage:
                if (prog.mode == InputMode::Current) {
                    if (!prog.isolator)
                        throw ParseError("voltage amplitude in a current-clamp program without an isolator", a.line,
                                         a.column);
                    v *= prog.isolator_gain;
                }
                break;
            default:
                throw ParseError("amplitude must be a current or a voltage", a.line, a.column);
        }
        *a.target = v;
    }

    // time order and overlap
    std::vector<std::size_t> order(prog.segments.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return prog.segments[a].t0 < prog.segments[b].t0; });
    std::vector<Segment> sorted;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& s = prog.segments[order[k]];
        if (!sorted.empty() && s.t0 < sorted.back().t1) {
            const auto& loc = seg_locations[order[k]];
            throw ParseError("segment overlaps the previous segment", loc.first, loc.second);
        }
        sorted.push_back(s);
    }
    prog.segments = std::move(sorted);
    prog.validate();
    return prog;
}

namespace detail {
inline std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}
}  // namespace detail

/// Canonical text in SI base units; parse_protocol(render(p)) == p.
inline std::string render(const StimulusProgram& p) {
    using detail::num;
    const std::string unit = p.mode == InputMode::Current ? "A" : "V";
    std::ostringstream os;
    os << "mode " << to_string(p.mode) << '\n';
    if (p.isolator) os << "isolator gain=" << num(p.isolator_gain) << '\n';
    if (p.noise)
        os << "noise pp=" << num(p.noise->peak_to_peak) << unit << " hold=" << num(p.noise->hold)
           << "s seed=" << p.noise->seed << '\n';
    for (const auto& s : p.segments) {
        os << to_string(s.kind) << " t0=" << num(s.t0) << 's';
        switch (s.kind) {
            case SegmentKind::Dc: os << " t1=" << num(s.t1) << "s amp=" << num(s.amp) << unit; break;
            case SegmentKind::Pulse: os << " width=" << num(s.width) << "s amp=" << num(s.amp) << unit; break;
            case SegmentKind::Doublet:
                os << " width=" << num(s.width) << "s interval=" << num(s.interval) << "s amp=" << num(s.amp) << unit
                   << " amp2=" << num(s.amp2) << unit;
                break;
            case SegmentKind::Ramp:
                os << " t1=" << num(s.t1) << "s from=" << num(s.amp) << unit << " to=" << num(s.amp2) << unit;
                break;
            case SegmentKind::Zap:
                os << " t1=" << num(s.t1) << "s amp=" << num(s.amp) << unit << " f0=" << num(s.f_start)
                   << "Hz f1=" << num(s.f_end) << "Hz offset=" << num(s.offset) << unit;
                break;
            case SegmentKind::Silence: os << " t1=" << num(s.t1) << 's'; break;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace mottsim
