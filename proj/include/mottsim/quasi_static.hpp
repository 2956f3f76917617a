#pragma once

// Quasi-static I-V characteristics of a single device branch. At every sweep
// point the state equation is relaxed to its attracting equilibrium, starting
// from the previous point's state. In one dimension relaxation is monotone, so
// the attractor is the first root of du/dt in the direction of motion; it is
// located by a scan on a log-spaced grid followed by bisection.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mottsim/device.hpp"

namespace mottsim {

enum class DriveMode { ForceVoltage, ForceCurrent };

struct SweepRange {
    double start = 0;
    double stop = 0;
    double step = 0;
};

struct IvPoint {
    double drive = 0;  ///< applied quantity (V or A)
    double v = 0;      ///< terminal voltage
    double i = 0;      ///< terminal current
    double u = 0;      ///< relaxed state
    bool up = true;    ///< part of the up-sweep
};

struct IvCurve {
    DriveMode mode = DriveMode::ForceVoltage;
    std::vector<IvPoint> points;
};

class QuasiStaticSolver {
public:
    explicit QuasiStaticSolver(const Device& device, std::size_t grid_points = 4000)
        : branch_(device) {
        device.validate();
        grid_.reserve(grid_points);
        const double a = std::log(kStateFloor), b = std::log(kStateCeil);
        for (std::size_t k = 0; k < grid_points; ++k)
            grid_.push_back(std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(grid_points - 1)));
    }

    /// Heating minus cooling at state u for the given drive.
    [[nodiscard]] double net_power(double u, DriveMode mode, double drive) const {
        const double i_term = mode == DriveMode::ForceCurrent ? drive : drive / branch_.resistance(u);
        const double i_ch = i_term * branch_.channel_fraction(u);
        const auto& ch = branch_.channel();
        return i_ch * i_ch * ch.resistance_at(u) - ch.heat_flux_at(u);
    }

    /// Attracting equilibrium reached from u0.
    [[nodiscard]] double relax(double u0, DriveMode mode, double drive) const {
        u0 = MottChannel::clamp(u0);
        const double p0 = net_power(u0, mode, drive);
        if (!std::isfinite(p0)) throw std::runtime_error("quasi-static relaxation: non-finite power balance");
        if (p0 == 0.0) return u0;
        const bool up = p0 > 0;
        // first grid node strictly beyond u0 in the direction of motion
        std::size_t k = 0;
        while (k < grid_.size() && grid_[k] <= u0) ++k;
        double lo = u0, p_lo = p0;
        if (up) {
            for (; k < grid_.size(); ++k) {
                const double p = net_power(grid_[k], mode, drive);
                if (p <= 0) return bisect(lo, grid_[k], p_lo, mode, drive);
                lo = grid_[k];
                p_lo = p;
            }
            return kStateCeil;
        }
        std::size_t j = k;  // grid_[j-1] <= u0
        while (j > 0 && grid_[j - 1] >= u0) --j;
        for (; j > 0; --j) {
            const double g = grid_[j - 1];
            const double p = net_power(g, mode, drive);
            if (p >= 0) return bisect(g, lo, p, mode, drive);
            lo = g;
            p_lo = p;
        }
        return kStateFloor;
    }

    [[nodiscard]] IvPoint point(double u, DriveMode mode, double drive, bool up) const {
        IvPoint p;
        p.drive = drive;
        p.u = u;
        p.up = up;
        if (mode == DriveMode::ForceCurrent) {
            p.i = drive;
            p.v = drive * branch_.resistance(u);
        } else {
            p.v = drive;
            p.i = drive / branch_.resistance(u);
        }
        return p;
    }

    [[nodiscard]] const DeviceBranch& branch() const { return branch_; }

private:
    double bisect(double a, double b, double p_a, DriveMode mode, double drive) const {
        for (int it = 0; it < 200 && (b - a) > 1e-14 * b; ++it) {
            const double m = 0.5 * (a + b);
            const double p = net_power(m, mode, drive);
            if ((p > 0) == (p_a > 0)) {
                a = m;
                p_a = p;
            } else {
                b = m;
            }
        }
        return 0.5 * (a + b);
    }

    DeviceBranch branch_;
    std::vector<double> grid_;
};

/// Up-sweep from `sweep.start` to `sweep.stop`, then back down.
inline IvCurve quasi_static_iv(const Device& device, DriveMode mode, const SweepRange& sweep) {
    if (!(sweep.step > 0) || !(sweep.stop > sweep.start))
        throw std::invalid_argument("quasi_static_iv: sweep needs stop > start and step > 0");
    const QuasiStaticSolver qs(device);
    IvCurve curve;
    curve.mode = mode;
    const auto n = static_cast<std::size_t>(std::floor((sweep.stop - sweep.start) / sweep.step + 1e-9));
    double u = kStateFloor;
    curve.points.reserve(2 * n + 2);
    for (std::size_t k = 0; k <= n; ++k) {
        const double x = sweep.start + sweep.step * static_cast<double>(k);
        u = qs.relax(u, mode, x);
        curve.points.push_back(qs.point(u, mode, x, true));
    }
    for (std::size_t k = n; k-- > 0;) {
        const double x = sweep.start + sweep.step * static_cast<double>(k);
        u = qs.relax(u, mode, x);
        curve.points.push_back(qs.point(u, mode, x, false));
    }
    return curve;
}

/// Segments of a force-current curve with negative incremental slope dv/di.
inline std::vector<std::pair<std::size_t, std::size_t>> ndr_segments(const IvCurve& curve) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::optional<std::size_t> begin;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const auto& a = curve.points[k - 1];
        const auto& b = curve.points[k];
        const bool negative = a.up && b.up && (b.i - a.i) > 0 && (b.v - a.v) < 0;
        if (negative && !begin) begin = k - 1;
        if (!negative && begin) {
            out.emplace_back(*begin, k - 1);
            begin.reset();
        }
    }
    if (begin) out.emplace_back(*begin, curve.points.size() - 1);
    return out;
}

namespace detail {

// u above which a state is considered to have left the insulating branch.
inline double jumped(double u_before, double u_after) { return u_after > 10.0 * u_before && u_after > 0.05; }

}  // namespace detail

/// Insulating-to-metallic switching voltage in force-voltage mode, measured
/// across the whole branch (channel plus electrode resistance).
inline double threshold_voltage(const Device& device, double v_max = 10.0, double step = 1e-3) {
    const QuasiStaticSolver qs(device);
    double u = kStateFloor;
    double v_prev = 0;
    for (double v = step; v <= v_max; v += step) {
        const double u_next = qs.relax(u, DriveMode::ForceVoltage, v);
        if (detail::jumped(u, u_next)) {
            // bisect the fold between v_prev (low branch exists) and v
            double lo = v_prev, hi = v;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double um = qs.relax(u, DriveMode::ForceVoltage, mid);
                if (detail::jumped(u, um)) hi = mid; else lo = mid;
            }
            return 0.5 * (lo + hi);
        }
        u = u_next;
        v_prev = v;
    }
    throw std::runtime_error("threshold_voltage: no insulating-to-metallic jump below " + std::to_string(v_max) + " V");
}

/// Peak voltage of the insulating branch of the force-current S-curve.
inline double s_curve_peak_voltage(const Device& device, double i_max = 10e-3, double step = 1e-7) {
    const QuasiStaticSolver qs(device);
    double u = kStateFloor;
    double best_v = 0, best_i = 0;
    for (double i = step; i <= i_max; i += step) {
        u = qs.relax(u, DriveMode::ForceCurrent, i);
        const double v = i * qs.branch().resistance(u);
        if (v > best_v) {
            best_v = v;
            best_i = i;
        } else if (v < 0.98 * best_v) {
            break;
        }
    }
    // golden-section refinement around the coarse maximum; relax from the floor
    // since the force-current equilibrium is unique on the insulating branch
    auto volt = [&](double i) {
        const double uu = qs.relax(kStateFloor, DriveMode::ForceCurrent, i);
        return i * qs.branch().resistance(uu);
    };
    double a = std::max(0.0, best_i - 2 * step), b = best_i + 2 * step;
    const double gr = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 80; ++it) {
        const double c = b - gr * (b - a), d = a + gr * (b - a);
        if (volt(c) > volt(d)) b = d; else a = c;
    }
    return std::max(best_v, volt(0.5 * (a + b)));
}

}  // namespace mottsim
